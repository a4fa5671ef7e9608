#include "bufferattack/attack.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "json.hpp"

namespace bufferattack {

using nlohmann::json;

bool TargetFilter::is_target(const std::string& token) const {
  if (token.empty() || stopwords_.count(token)) return false;
  return std::any_of(token.begin(), token.end(), [](char ch) {
    const auto c = static_cast<unsigned char>(ch);
    return !(std::isdigit(c) || std::ispunct(c));
  });
}

std::vector<std::size_t> TargetFilter::positions(const Tokens& tokens) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (is_target(tokens[i])) out.push_back(i);
  return out;
}

Tokens delete_position(const Tokens& tokens, std::size_t position) {
  Tokens out;
  out.reserve(tokens.size() - 1);
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (i != position) out.push_back(tokens[i]);
  return out;
}

ImportanceResult word_importance(const Document& doc, const std::vector<std::size_t>& targets,
                                 VictimHandle& victim) {
  ImportanceResult out;
  const ClassIndex y = doc.label;
  try {
    out.base = victim.predict(doc.tokens);
    const Prediction& base = *out.base;
    for (std::size_t pos : targets) {
      const Prediction del = victim.predict(delete_position(doc.tokens, pos));
      ImportanceScore s;
      s.position = pos;
      s.word = doc.tokens[pos];
      s.label_conf_full = base.confidence(y);
      s.label_conf_deleted = del.confidence(y);
      s.deleted_label = del.hard_label();
      s.score = s.label_conf_full - s.label_conf_deleted;
      if (s.deleted_label != y) {
        s.flip_conf_full = base.confidence(s.deleted_label);
        s.flip_conf_deleted = del.confidence(s.deleted_label);
        s.score += s.flip_conf_full - s.flip_conf_deleted;
      }
      out.scores.push_back(std::move(s));
    }
  } catch (const BudgetExhausted&) {
    out.budget_exhausted = true;
  }
  return out;
}

std::vector<ImportanceScore> select_targets(std::vector<ImportanceScore> scores, double epsilon) {
  if (scores.empty()) return scores;
  std::stable_sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.position < b.position;
  });
  auto k = static_cast<std::size_t>(std::floor(epsilon * static_cast<double>(scores.size())));
  k = std::clamp<std::size_t>(k, 1, scores.size());
  scores.resize(k);
  return scores;
}

std::string AttackTrace::to_jsonl() const {
  std::string out;
  auto emit = [&](json j) {
    j["doc"] = doc_id;
    out += j.dump();
    out += '\n';
  };
  for (const auto& s : importance) {
    json j = {{"type", "importance"},
              {"position", s.position},
              {"word", s.word},
              {"score", s.score},
              {"label_conf_full", s.label_conf_full},
              {"label_conf_deleted", s.label_conf_deleted},
              {"deleted_label", s.deleted_label},
              {"flip_conf_full", s.flip_conf_full},
              {"flip_conf_deleted", s.flip_conf_deleted}};
    emit(std::move(j));
  }
  for (const auto& e : events) {
    json j = {{"type", e.kind == TraceEvent::Kind::kRefresh ? "refresh" : "substitute"},
              {"position", e.position},
              {"word", e.word},
              {"soft_label", e.soft_label},
              {"hard_label", e.hard_label},
              {"queries", e.queries_so_far}};
    if (e.kind == TraceEvent::Kind::kSubstitute) {
      j["candidate"] = e.candidate;
      j["delta"] = e.delta;
    }
    emit(std::move(j));
  }
  for (const auto& c : commits)
    emit({{"type", "commit"}, {"position", c.position}, {"word", c.word}, {"candidate", c.candidate}});
  emit({{"type", "end"}, {"status", std::string(to_string(status))}});
  return out;
}

namespace {

struct Flipper {
  std::string candidate;
  Tokens tokens;
};

}  // namespace

AttackResult attack_document(const Document& doc, VictimHandle& victim, HistoryTable& table,
                             const Lexicon& lexicon, const TargetFilter& filter,
                             const AttackConfig& raw_cfg) {
  const AttackConfig cfg = validate_config(raw_cfg);
  const ClassIndex y = doc.label;
  const std::uint64_t start = victim.queries();

  AttackResult result;
  AttackOutcome& outcome = result.outcome;
  AttackTrace& trace = result.trace;
  trace.doc_id = doc.id;
  outcome.adversarial = doc;
  Tokens& adv = outcome.adversarial.tokens;

  auto finish = [&](AttackStatus status) -> AttackResult& {
    outcome.status = status;
    trace.status = status;
    outcome.success = status == AttackStatus::kSuccess;
    outcome.queries_used = victim.queries() - start;
    outcome.stage_two_queries = outcome.queries_used - outcome.stage_one_queries;
    outcome.perturbed_fraction = perturbation_rate(doc, outcome.adversarial);
    outcome.similarity = lexicon.similarity(doc.tokens, adv);
    return result;
  };

  const auto targets = filter.positions(doc.tokens);
  if (targets.empty()) return finish(AttackStatus::kExhausted);

  ImportanceResult importance = word_importance(doc, targets, victim);
  outcome.stage_one_queries = victim.queries() - start;
  trace.importance = importance.scores;
  if (importance.budget_exhausted) return finish(AttackStatus::kBudget);
  if (importance.base->hard_label() != y) return finish(AttackStatus::kSkipped);

  const auto ranked = select_targets(std::move(importance.scores), cfg.epsilon);

  for (const auto& target : ranked) {
    const std::string& word = target.word;
    const SynonymSet& syn = lexicon.synonyms(word);
    const std::vector<std::string> cands =
        cfg.pruning_enabled
            ? candidate_list(word, table, y, cfg.gamma, cfg.alpha, syn).candidates
            : syn.words();
    trace.candidate_lists.push_back(cands);
    if (cands.empty()) continue;

    std::vector<Flipper> flippers;
    std::optional<std::string> best;
    double best_delta = 0.0;
    bool out_of_budget = false;
    try {
      const Prediction current = victim.predict(adv);
      const double soft_adv = current.confidence(y);
      trace.events.push_back({TraceEvent::Kind::kRefresh, target.position, word, "", soft_adv,
                              current.hard_label(), 0.0, victim.queries() - start});
      for (const auto& c : cands) {
        Tokens trial = adv;
        trial[target.position] = c;
        const Prediction p = victim.predict(trial);
        const double soft_c = p.confidence(y);
        const double delta = soft_adv - soft_c;
        table.record(word, y, c, delta);
        trace.events.push_back({TraceEvent::Kind::kSubstitute, target.position, word, c, soft_c,
                                p.hard_label(), delta, victim.queries() - start});
        if (!best || delta > best_delta) {
          best = c;
          best_delta = delta;
        }
        if (p.hard_label() != y) {
          flippers.push_back({c, std::move(trial)});
          if (!cfg.scan_all_candidates) break;
        }
      }
    } catch (const BudgetExhausted&) {
      out_of_budget = true;
    }

    if (!flippers.empty()) {
      std::size_t pick = 0;
      double best_sim = lexicon.similarity(doc.tokens, flippers[0].tokens);
      for (std::size_t i = 1; i < flippers.size(); ++i) {
        const double sim = lexicon.similarity(doc.tokens, flippers[i].tokens);
        if (sim > best_sim) {
          best_sim = sim;
          pick = i;
        }
      }
      adv = std::move(flippers[pick].tokens);
      trace.commits.push_back({target.position, word, flippers[pick].candidate});
      return finish(AttackStatus::kSuccess);
    }
    if (out_of_budget) return finish(AttackStatus::kBudget);
    if (best) {
      adv[target.position] = *best;
      trace.commits.push_back({target.position, word, *best});
    }
  }
  return finish(AttackStatus::kExhausted);
}

}  // namespace bufferattack
