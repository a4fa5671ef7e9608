#include "bufferattack/victim.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace bufferattack {

using nlohmann::json;

namespace {

constexpr int kModelVersion = 1;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

json parse_model_json(const std::string& text, const char* arch) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
  if (!j.is_object() || j.value("version", -1) != kModelVersion)
    throw FormatError("model file: unsupported version");
  if (j.value("arch", "") != arch)
    throw FormatError(std::string("model file: expected arch ") + arch);
  return j;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Prediction VictimHandle::predict(const Tokens& tokens) {
  std::uint64_t current = counter_.load(std::memory_order_relaxed);
  do {
    if (budget_ && current >= *budget_) throw BudgetExhausted();
  } while (!counter_.compare_exchange_weak(current, current + 1, std::memory_order_acq_rel));
  return model_->predict(tokens);
}

// --- naive Bayes -----------------------------------------------------------

NaiveBayesModel::NaiveBayesModel(Eigen::VectorXd class_doc_counts,
                                 std::map<std::string, Eigen::VectorXd> token_counts,
                                 double smoothing)
    : class_doc_counts_(std::move(class_doc_counts)),
      token_counts_(std::move(token_counts)),
      smoothing_(smoothing) {
  const Eigen::Index k = class_doc_counts_.size();
  const double docs = class_doc_counts_.sum();
  log_priors_ = (class_doc_counts_ / docs).unaryExpr([](double p) { return std::log(p); });

  Eigen::VectorXd totals = Eigen::VectorXd::Zero(k);
  for (const auto& [tok, counts] : token_counts_) totals += counts;
  const double vocab = static_cast<double>(token_counts_.size());
  const Eigen::VectorXd denom = (totals.array() + smoothing_ * vocab).matrix();
  for (const auto& [tok, counts] : token_counts_)
    log_likelihoods_.emplace(
        tok, ((counts.array() + smoothing_) / denom.array()).log().matrix());
}

NaiveBayesModel NaiveBayesModel::train(const std::vector<Document>& corpus, int num_classes,
                                       double smoothing) {
  if (corpus.empty()) throw std::invalid_argument("train_naive_bayes: empty corpus");
  if (num_classes < 1) throw std::invalid_argument("train_naive_bayes: num_classes < 1");
  if (!(smoothing > 0.0)) throw std::invalid_argument("train_naive_bayes: smoothing must be > 0");
  Eigen::VectorXd doc_counts = Eigen::VectorXd::Zero(num_classes);
  std::map<std::string, Eigen::VectorXd> token_counts;
  for (const auto& d : corpus) {
    if (d.label < 0 || d.label >= num_classes)
      throw std::invalid_argument("train_naive_bayes: label out of range in document " + d.id);
    doc_counts(d.label) += 1.0;
    for (const auto& t : d.tokens) {
      auto [it, inserted] = token_counts.try_emplace(t, Eigen::VectorXd::Zero(num_classes));
      it->second(d.label) += 1.0;
    }
  }
  return NaiveBayesModel(std::move(doc_counts), std::move(token_counts), smoothing);
}

const Eigen::VectorXd* NaiveBayesModel::token_log_likelihoods(const std::string& token) const {
  auto it = log_likelihoods_.find(token);
  return it == log_likelihoods_.end() ? nullptr : &it->second;
}

Prediction NaiveBayesModel::predict(const Tokens& tokens) const {
  Eigen::VectorXd scores = log_priors_;
  for (const auto& t : tokens)
    if (const auto* ll = token_log_likelihoods(t)) scores += *ll;
  return Prediction::from_probs(softmax(scores));
}

std::string NaiveBayesModel::to_json() const {
  json tokens = json::object();
  for (const auto& [tok, counts] : token_counts_) tokens[tok] = to_std(counts);
  json j = {{"version", kModelVersion},
            {"arch", "nb"},
            {"smoothing", smoothing_},
            {"class_doc_counts", to_std(class_doc_counts_)},
            {"token_counts", tokens}};
  return j.dump() + "\n";
}

NaiveBayesModel NaiveBayesModel::from_json(const std::string& text) {
  const json j = parse_model_json(text, "nb");
  try {
    Eigen::VectorXd doc_counts = to_eigen(j.at("class_doc_counts").get<std::vector<double>>());
    std::map<std::string, Eigen::VectorXd> token_counts;
    for (const auto& [tok, counts] : j.at("token_counts").items()) {
      auto v = to_eigen(counts.get<std::vector<double>>());
      if (v.size() != doc_counts.size()) throw FormatError("model file: class count mismatch");
      token_counts.emplace(tok, std::move(v));
    }
    const double smoothing = j.at("smoothing").get<double>();
    if (doc_counts.size() < 1 || !(smoothing > 0.0)) throw FormatError("model file: bad values");
    return NaiveBayesModel(std::move(doc_counts), std::move(token_counts), smoothing);
  } catch (const json::exception& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
}

// --- logistic regression ---------------------------------------------------

LogRegModel::LogRegModel(std::shared_ptr<const EmbeddingTable> table, Eigen::MatrixXd weights,
                         Eigen::VectorXd bias, std::uint64_t seed)
    : table_(std::move(table)), weights_(std::move(weights)), bias_(std::move(bias)), seed_(seed) {
  if (!table_) throw std::invalid_argument("LogRegModel: null embedding table");
  if (weights_.rows() != bias_.size() || weights_.cols() != table_->dim())
    throw std::invalid_argument("LogRegModel: parameter shape mismatch");
}

Eigen::VectorXd LogRegModel::features(const Tokens& tokens) const {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(table_->dim());
  std::size_t known = 0;
  for (const auto& t : tokens) {
    if (auto i = table_->index_of(t)) {
      sum += table_->vector(*i);
      ++known;
    }
  }
  if (known) sum /= static_cast<double>(known);
  return sum;
}

Prediction LogRegModel::predict(const Tokens& tokens) const {
  return Prediction::from_probs(softmax(weights_ * features(tokens) + bias_));
}

LossGradient softmax_loss_gradient(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                                   const Eigen::MatrixXd& features,
                                   const std::vector<ClassIndex>& labels) {
  const Eigen::Index n = features.rows();
  LossGradient out{0.0, Eigen::MatrixXd::Zero(weights.rows(), weights.cols()),
                   Eigen::VectorXd::Zero(bias.size())};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd x = features.row(i).transpose();
    Eigen::VectorXd p = softmax(weights * x + bias);
    const auto y = labels[static_cast<std::size_t>(i)];
    out.loss -= std::log(std::max(p(y), std::numeric_limits<double>::min()));
    p(y) -= 1.0;
    out.grad_weights.noalias() += p * x.transpose();
    out.grad_bias += p;
  }
  const double inv = 1.0 / static_cast<double>(n);
  out.loss *= inv;
  out.grad_weights *= inv;
  out.grad_bias *= inv;
  return out;
}

LogRegModel LogRegModel::train(const std::vector<Document>& corpus,
                               std::shared_ptr<const EmbeddingTable> table, int num_classes,
                               const LogRegOptions& opts) {
  if (corpus.empty()) throw std::invalid_argument("train_logreg: empty corpus");
  if (num_classes < 2) throw std::invalid_argument("train_logreg: need at least two classes");
  if (!table) throw std::invalid_argument("train_logreg: null embedding table");
  LogRegModel model(table, Eigen::MatrixXd::Zero(num_classes, table->dim()),
                    Eigen::VectorXd::Zero(num_classes), opts.seed);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(corpus.size()), table->dim());
  std::vector<ClassIndex> labels;
  labels.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].label < 0 || corpus[i].label >= num_classes)
      throw std::invalid_argument("train_logreg: label out of range in document " + corpus[i].id);
    x.row(static_cast<Eigen::Index>(i)) = model.features(corpus[i].tokens).transpose();
    labels.push_back(corpus[i].label);
  }
  for (int e = 0; e < opts.epochs; ++e) {
    const auto g = softmax_loss_gradient(model.weights_, model.bias_, x, labels);
    model.weights_ -= opts.learning_rate * g.grad_weights;
    model.bias_ -= opts.learning_rate * g.grad_bias;
  }
  return model;
}

std::string LogRegModel::to_json(const std::string& embeddings_path) const {
  json w = json::array();
  for (Eigen::Index r = 0; r < weights_.rows(); ++r)
    w.push_back(to_std(weights_.row(r).transpose()));
  json j = {{"version", kModelVersion},
            {"arch", "logreg"},
            {"embeddings", embeddings_path},
            {"dim", table_->dim()},
            {"seed", seed_},
            {"weights", w},
            {"bias", to_std(bias_)}};
  return j.dump() + "\n";
}

LogRegModel LogRegModel::from_json(const std::string& text,
                                   std::shared_ptr<const EmbeddingTable> table) {
  const json j = parse_model_json(text, "logreg");
  try {
    if (!table) table = std::make_shared<const EmbeddingTable>(
                    EmbeddingTable::load(j.at("embeddings").get<std::string>()));
    if (j.at("dim").get<Eigen::Index>() != table->dim())
      throw FormatError("model file: embedding dimension mismatch");
    const auto rows = j.at("weights");
    Eigen::VectorXd bias = to_eigen(j.at("bias").get<std::vector<double>>());
    Eigen::MatrixXd w(bias.size(), table->dim());
    if (rows.size() != static_cast<std::size_t>(bias.size()))
      throw FormatError("model file: weight rows do not match classes");
    for (std::size_t r = 0; r < rows.size(); ++r) {
      auto v = rows[r].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(v.size()) != table->dim())
        throw FormatError("model file: weight row has wrong width");
      w.row(static_cast<Eigen::Index>(r)) = to_eigen(v).transpose();
    }
    return LogRegModel(table, std::move(w), std::move(bias), j.value("seed", std::uint64_t{0}));
  } catch (const json::exception& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
}

// --- persistence -------------------------------------------------------------

void save_model(const std::filesystem::path& path, const NaiveBayesModel& model) {
  write_file(path, model.to_json());
}

void save_model(const std::filesystem::path& path, const LogRegModel& model,
                const std::string& embeddings_path) {
  write_file(path, model.to_json(embeddings_path));
}

std::unique_ptr<Classifier> load_model(const std::filesystem::path& path,
                                       std::shared_ptr<const EmbeddingTable> table) {
  const std::string text = read_file(path);
  std::string arch;
  try {
    arch = json::parse(text).value("arch", "");
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (arch == "nb") return std::make_unique<NaiveBayesModel>(NaiveBayesModel::from_json(text));
  if (arch == "logreg")
    return std::make_unique<LogRegModel>(LogRegModel::from_json(text, std::move(table)));
  throw FormatError(path.string() + ": unknown model arch '" + arch + "'");
}

}  // namespace bufferattack
