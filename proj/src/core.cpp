#include "bufferattack/core.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace bufferattack {

namespace {

void check_distribution(const Eigen::VectorXd& probs) {
  if (probs.size() == 0) throw std::invalid_argument("empty probability vector");
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const double p = probs(i);
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
      throw std::invalid_argument("probability " + std::to_string(i) + " outside [0,1]");
  }
  const double sum = probs.sum();
  if (std::abs(sum - 1.0) > Prediction::kProbabilityTolerance)
    throw std::invalid_argument("probabilities sum to " + std::to_string(sum));
}

bool is_punct(unsigned char c) { return std::ispunct(c) != 0; }
bool is_separator(unsigned char c) { return std::isspace(c) != 0 || std::iscntrl(c) != 0; }

}  // namespace

Prediction Prediction::from_probs(Eigen::VectorXd probs) {
  check_distribution(probs);
  const ClassIndex label = argmax(probs);
  return Prediction(label, std::move(probs));
}

Prediction Prediction::from_labeled(ClassIndex label, Eigen::VectorXd probs) {
  check_distribution(probs);
  if (label < 0 || label >= probs.size())
    throw std::invalid_argument("label " + std::to_string(label) + " out of range");
  if (label != argmax(probs))
    throw std::invalid_argument("label " + std::to_string(label) + " is not the argmax");
  return Prediction(label, std::move(probs));
}

AttackConfig validate_config(const AttackConfig& cfg) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0)) fail("epsilon out of (0,1]");
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) fail("gamma out of (0,1]");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) fail("alpha out of (0,1)");
  if (cfg.synonym_top_n == 0) fail("synonym_top_n must be positive");
  if (!(cfg.synonym_min_sim >= -1.0 && cfg.synonym_min_sim <= 1.0))
    fail("synonym_min_sim out of [-1,1]");
  if (cfg.query_budget && *cfg.query_budget == 0) fail("query_budget must be positive");
  return cfg;
}

std::string config_fingerprint(const AttackConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "epsilon=" << cfg.epsilon << ";gamma=" << cfg.gamma << ";alpha=" << cfg.alpha
     << ";top_n=" << cfg.synonym_top_n << ";min_sim=" << cfg.synonym_min_sim
     << ";budget=" << (cfg.query_budget ? std::to_string(*cfg.query_budget) : "none")
     << ";pruning=" << (cfg.pruning_enabled ? 1 : 0)
     << ";scan_all=" << (cfg.scan_all_candidates ? 1 : 0) << ";seed=" << cfg.seed;
  return os.str();
}

std::string_view to_string(AttackStatus s) {
  switch (s) {
    case AttackStatus::kSuccess: return "success";
    case AttackStatus::kExhausted: return "exhausted";
    case AttackStatus::kBudget: return "budget";
    case AttackStatus::kSkipped: return "skipped";
  }
  return "unknown";
}

AttackStatus attack_status_from_string(std::string_view s) {
  if (s == "success") return AttackStatus::kSuccess;
  if (s == "exhausted") return AttackStatus::kExhausted;
  if (s == "budget") return AttackStatus::kBudget;
  if (s == "skipped") return AttackStatus::kSkipped;
  throw FormatError("unknown attack status '" + std::string(s) + "'");
}

double perturbation_rate(const Document& original, const Document& adversarial) {
  const auto n = original.tokens.size();
  if (n != adversarial.tokens.size())
    throw std::invalid_argument("perturbation_rate: token count mismatch");
  if (n == 0) throw std::invalid_argument("perturbation_rate: empty document");
  std::size_t changed = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (original.tokens[i] != adversarial.tokens[i]) ++changed;
  return static_cast<double>(changed) / static_cast<double>(n);
}

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_separator(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_separator(static_cast<unsigned char>(text[j]))) ++j;
    std::size_t b = i, e = j;
    while (b < e && is_punct(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && is_punct(static_cast<unsigned char>(text[e - 1]))) --e;
    if (b < e) {
      std::string tok(text.substr(b, e - b));
      for (auto& ch : tok) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      out.push_back(std::move(tok));
    }
    i = j;
  }
  return out;
}

std::string join_tokens(const Tokens& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace bufferattack
