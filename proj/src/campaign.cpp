#include "bufferattack/campaign.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "json.hpp"

namespace bufferattack {

using nlohmann::json;

namespace {

void finalize(CampaignReport& r) {
  const auto frac = [](std::size_t a, std::size_t b) {
    return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0;
  };
  r.original_accuracy = frac(r.correct, r.total);
  r.adv_accuracy = frac(r.correct - r.success_count, r.total);
  r.attacked_accuracy = frac(r.attacked - r.success_count, r.attacked);
  r.total_queries = r.stage_one_queries = r.stage_two_queries = 0;
  std::uint64_t success_queries = 0;
  double perturb = 0.0, sim = 0.0;
  for (const auto& d : r.documents) {
    if (!d.outcome) continue;
    r.total_queries += d.outcome->queries_used;
    r.stage_one_queries += d.outcome->stage_one_queries;
    r.stage_two_queries += d.outcome->stage_two_queries;
    if (d.outcome->success) {
      success_queries += d.outcome->queries_used;
      perturb += d.outcome->perturbed_fraction;
      sim += d.outcome->similarity;
    }
  }
  r.mean_queries = r.attacked ? static_cast<double>(r.total_queries) / r.attacked : 0.0;
  r.mean_queries_successful =
      r.success_count ? static_cast<double>(success_queries) / r.success_count : 0.0;
  r.mean_perturbation = r.success_count ? perturb / r.success_count : 0.0;
  r.mean_similarity = r.success_count ? sim / r.success_count : 0.0;
}

json outcome_json(const AttackOutcome& o) {
  return {{"status", std::string(to_string(o.status))},
          {"success", o.success},
          {"queries", o.queries_used},
          {"stage_one_queries", o.stage_one_queries},
          {"stage_two_queries", o.stage_two_queries},
          {"perturbed_fraction", o.perturbed_fraction},
          {"similarity", o.similarity},
          {"adversarial", join_tokens(o.adversarial.tokens)}};
}

}  // namespace

std::string CampaignReport::to_json() const {
  json docs = json::array();
  for (const auto& d : documents) {
    json j = {{"id", d.id},
              {"label", d.label},
              {"originally_correct", d.originally_correct},
              {"original_prediction", d.original_prediction}};
    if (d.outcome) j["outcome"] = outcome_json(*d.outcome);
    docs.push_back(std::move(j));
  }
  json j = {{"version", 1},
            {"config", config_fingerprint},
            {"total", total},
            {"correct", correct},
            {"attacked", attacked},
            {"success_count", success_count},
            {"original_accuracy", original_accuracy},
            {"adv_accuracy", adv_accuracy},
            {"attacked_accuracy", attacked_accuracy},
            {"screening_queries", screening_queries},
            {"total_queries", total_queries},
            {"stage_one_queries", stage_one_queries},
            {"stage_two_queries", stage_two_queries},
            {"mean_queries", mean_queries},
            {"mean_queries_successful", mean_queries_successful},
            {"mean_perturbation", mean_perturbation},
            {"mean_similarity", mean_similarity},
            {"documents", docs}};
  return j.dump(2) + "\n";
}

CampaignReport CampaignReport::from_json(const std::string& text) {
  CampaignReport r;
  try {
    const json j = json::parse(text);
    if (j.value("version", -1) != 1) throw FormatError("report: unsupported version");
    r.config_fingerprint = j.at("config").get<std::string>();
    r.total = j.at("total").get<std::size_t>();
    r.correct = j.at("correct").get<std::size_t>();
    r.attacked = j.at("attacked").get<std::size_t>();
    r.success_count = j.at("success_count").get<std::size_t>();
    r.screening_queries = j.at("screening_queries").get<std::uint64_t>();
    for (const auto& d : j.at("documents")) {
      DocumentRecord rec;
      rec.id = d.at("id").get<std::string>();
      rec.label = d.at("label").get<int>();
      rec.originally_correct = d.at("originally_correct").get<bool>();
      rec.original_prediction = d.at("original_prediction").get<int>();
      if (d.contains("outcome")) {
        const auto& o = d["outcome"];
        AttackOutcome out;
        out.status = attack_status_from_string(o.at("status").get<std::string>());
        out.success = o.at("success").get<bool>();
        out.queries_used = o.at("queries").get<std::uint64_t>();
        out.stage_one_queries = o.at("stage_one_queries").get<std::uint64_t>();
        out.stage_two_queries = o.at("stage_two_queries").get<std::uint64_t>();
        out.perturbed_fraction = o.at("perturbed_fraction").get<double>();
        out.similarity = o.at("similarity").get<double>();
        out.adversarial = {rec.id, tokenize(o.at("adversarial").get<std::string>()), rec.label};
        rec.outcome = std::move(out);
      }
      r.documents.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
  finalize(r);
  return r;
}

CampaignResult run_campaign(const std::vector<Document>& dataset, const Classifier& victim,
                            const Lexicon& lexicon, const TargetFilter& filter,
                            const CampaignOptions& options) {
  const AttackConfig cfg = validate_config(options.attack);
  if (lexicon.top_n() != cfg.synonym_top_n || lexicon.min_sim() != cfg.synonym_min_sim)
    throw ConfigError("lexicon synonym settings do not match the attack config");

  auto result = std::make_shared<CampaignResult>();
  if (options.warm_table) result->table = *options.warm_table;
  result->table.metadata().created_by = "bufferattack";
  result->table.metadata().config_fingerprint = config_fingerprint(cfg);
  CampaignReport& report = result->report;
  report.config_fingerprint = config_fingerprint(cfg);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  if (options.shuffle_seed) {
    std::mt19937_64 rng(*options.shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  VictimHandle screening(victim);
  for (std::size_t idx : order) {
    const Document& doc = dataset[idx];
    if (doc.tokens.empty()) throw ConfigError("document " + doc.id + " has no tokens");
    if (doc.label < 0 || doc.label >= victim.num_classes())
      throw ConfigError("document " + doc.id + " label out of range for the victim");
    DocumentRecord rec{doc.id, doc.label, false, 0, std::nullopt};
    try {
      const Prediction p = screening.predict(doc.tokens);
      rec.original_prediction = p.hard_label();
      rec.originally_correct = p.hard_label() == doc.label;
      ++report.total;
      if (rec.originally_correct) {
        ++report.correct;
        VictimHandle handle(victim, cfg.query_budget);
        AttackResult r = attack_document(doc, handle, result->table, lexicon, filter, cfg);
        ++report.attacked;
        if (r.outcome.success) ++report.success_count;
        result->adversarial.push_back(r.outcome.adversarial);
        result->traces.push_back(std::move(r.trace));
        spdlog::debug("{}: {} after {} queries", doc.id, to_string(r.outcome.status),
                      r.outcome.queries_used);
        rec.outcome = std::move(r.outcome);
      }
      report.documents.push_back(std::move(rec));
    } catch (const ProtocolError& e) {
      report.screening_queries = screening.queries();
      finalize(report);
      throw CampaignAborted(std::string("victim failure on ") + doc.id + ": " + e.what(), true,
                            result);
    } catch (const IoError& e) {
      report.screening_queries = screening.queries();
      finalize(report);
      throw CampaignAborted(std::string("I/O failure on ") + doc.id + ": " + e.what(), false,
                            result);
    }
  }
  report.screening_queries = screening.queries();
  finalize(report);
  spdlog::info("campaign: {} docs, {} attacked, {} successes, {:.1f} mean queries", report.total,
               report.attacked, report.success_count, report.mean_queries);
  return std::move(*result);
}

std::string BudgetSweepResult::to_json() const {
  json pts = json::array();
  for (const auto& p : points)
    pts.push_back({{"budget", p.budget},
                   {"success_count", p.success_count},
                   {"attacked", p.attacked},
                   {"max_document_queries", p.max_document_queries}});
  return json{{"version", 1}, {"points", pts}}.dump(2) + "\n";
}

BudgetSweepResult budget_sweep(const std::vector<Document>& dataset, const Classifier& victim,
                               const Lexicon& lexicon, const TargetFilter& filter,
                               const CampaignOptions& options,
                               const std::vector<std::uint64_t>& budgets) {
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (budgets[i] == 0) throw ConfigError("budgets must be positive");
    if (i && budgets[i] <= budgets[i - 1]) throw ConfigError("budgets must be ascending");
  }
  BudgetSweepResult out;
  for (auto q : budgets) {
    CampaignOptions opts = options;
    opts.attack.query_budget = q;
    const auto r = run_campaign(dataset, victim, lexicon, filter, opts);
    BudgetSweepPoint p{q, r.report.success_count, r.report.attacked, 0};
    for (const auto& d : r.report.documents)
      if (d.outcome) p.max_document_queries = std::max(p.max_document_queries, d.outcome->queries_used);
    out.points.push_back(p);
  }
  return out;
}

TransferResult evaluate_transfer(const std::vector<Document>& docs, const Classifier& victim) {
  TransferResult out;
  VictimHandle handle(victim);
  for (const auto& d : docs) {
    ++out.total;
    if (handle.predict(d.tokens).hard_label() == d.label) ++out.correct;
  }
  out.queries = handle.queries();
  out.accuracy = out.total ? static_cast<double>(out.correct) / out.total : 0.0;
  return out;
}

std::string render_report(const CampaignReport& r, QueryAveraging averaging) {
  char line[256];
  std::string out;
  std::snprintf(line, sizeof line, "%-18s %-14s %-12s %-11s %-13s\n", "Original Accuracy",
                "Adv Accuracy", "% Perturbed", "Query Num", "Semantic Sim");
  out += line;
  const double queries =
      averaging == QueryAveraging::kAttacked ? r.mean_queries : r.mean_queries_successful;
  std::snprintf(line, sizeof line, "%-18.1f %-14.1f %-12.1f %-11.1f %-13.3f\n",
                100.0 * r.original_accuracy, 100.0 * r.adv_accuracy, 100.0 * r.mean_perturbation,
                queries, r.mean_similarity);
  out += line;
  std::snprintf(line, sizeof line,
                "documents=%zu correct=%zu attacked=%zu successes=%zu queries=%llu "
                "(stage one %llu, stage two %llu; %s-averaged)\n",
                r.total, r.correct, r.attacked, r.success_count,
                static_cast<unsigned long long>(r.total_queries),
                static_cast<unsigned long long>(r.stage_one_queries),
                static_cast<unsigned long long>(r.stage_two_queries),
                averaging == QueryAveraging::kAttacked ? "attacked" : "success");
  out += line;
  return out;
}

}  // namespace bufferattack
