// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include <spdlog/spdlog.h>

#include "bufferattack/campaign.hpp"
#include "bufferattack/stats.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace ba = bufferattack;
using ba::testing::ToyWorld;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Verdict()>& check) {
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  if (!v.pass) ++failures;
  std::printf("[%s] %d %s: %s\n", v.pass ? "PASS" : "FAIL", id, title, v.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const ba::Lexicon& lexicon() {
  static const ba::Lexicon lex(ToyWorld::get().table, 50, 0.5);
  return lex;
}

Verdict statistics_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> n(2, 40);
  std::uniform_real_distribution<double> mu(-0.5, 0.5), sd(0.001, 0.5);
  double worst_t = 0.0, worst_dof = 0.0;
  const int pairs = 200;
  for (int i = 0; i < pairs; ++i) {
    auto draw = [&] {
      std::normal_distribution<double> d(mu(rng), sd(rng));
      std::vector<double> xs(n(rng));
      for (auto& x : xs) x = std::clamp(d(rng), -1.0, 1.0);
      return xs;
    };
    const auto a = draw(), b = draw();
    const auto got = ba::stats::welch_t(ba::stats::SampleSummary::of(a),
                                        ba::stats::SampleSummary::of(b));
    const auto want = ba::oracle::welch(a, b);
    worst_t = std::max(worst_t, std::abs(got.t_stat - want.t));
    worst_dof = std::max(worst_dof, std::abs(got.dof - want.dof));
  }
  double worst_q = 0.0;
  for (double p : {0.90, 0.95, 0.99})
    for (double dof : {1.0, 2.0, 5.0, 10.0, 30.0, 100.0, 1000.0})
      worst_q = std::max(worst_q,
                         std::abs(ba::stats::t_quantile(p, dof) - ba::oracle::t_quantile(p, dof)));
  const double elapsed = seconds_since(t0);
  const bool ok = worst_t <= 1e-12 && worst_dof <= 1e-12 && worst_q <= 1e-4 && elapsed < 1.0;
  return {ok, fmt("%d welch pairs max|dt|=%.2e max|ddof|=%.2e; 21 quantiles max err=%.2e; %.3fs",
                  pairs, worst_t, worst_dof, worst_q, elapsed)};
}

Verdict pruning_oracle() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> ncand(1, 15), nsamp(1, 8);
  std::uniform_real_distribution<double> mu(-0.4, 0.8), sd(0.0, 0.25), g(0.05, 1.0),
      a(0.05, 0.5);
  std::bernoulli_distribution constant(0.1);
  int mismatches = 0, total_kept = 0, total_cands = 0;
  const int fixtures = 50;
  for (int f = 0; f < fixtures; ++f) {
    ba::HistoryTable t;
    const int n = ncand(rng);
    for (int c = 0; c < n; ++c) {
      const std::string cand = "c" + std::to_string(c);
      const double m = mu(rng);
      std::normal_distribution<double> d(m, sd(rng));
      const bool flat = constant(rng);
      const int k = nsamp(rng);
      for (int i = 0; i < k; ++i) t.record("w", 1, cand, std::clamp(flat ? m : d(rng), -1.0, 1.0));
    }
    const double gamma = g(rng), alpha = a(rng);
    ba::SynonymSet fb{"w", {{"f1", 0.9}, {"f2", 0.8}}};
    const auto got = ba::candidate_list("w", t, 1, gamma, alpha, fb).candidates;
    const auto want = ba::oracle::candidate_list("w", t, 1, gamma, alpha, fb.words());
    mismatches += got != want;
    total_kept += static_cast<int>(got.size());
    total_cands += n;
  }
  return {mismatches == 0, fmt("%d fixtures, %d mismatches (%d of %d candidates kept)", fixtures,
                               mismatches, total_kept, total_cands)};
}

Verdict baseline_equivalence() {
  const auto& w = ToyWorld::get();
  ba::AttackConfig cfg;
  cfg.pruning_enabled = false;
  int instances = 0, trace_diffs = 0, query_diffs = 0;
  std::size_t bytes = 0;
  for (const auto& d : w.attack) {
    if (w.nb->predict(d.tokens).hard_label() != d.label) continue;
    ba::VictimHandle h(*w.nb);
    ba::HistoryTable table;
    const auto r = ba::attack_document(d, h, table, lexicon(), w.filter, cfg);
    std::uint64_t ref_queries = 0;
    const auto ref = ba::oracle::textfooler_reference(d, *w.nb, lexicon(), w.filter,
                                                      cfg.epsilon, ref_queries);
    const auto a = r.trace.to_jsonl(), b = ref.to_jsonl();
    bytes += a.size();
    trace_diffs += a != b;
    query_diffs += r.outcome.queries_used != ref_queries || h.queries() != ref_queries;
    if (++instances == 20) break;
  }
  return {instances == 20 && trace_diffs == 0 && query_diffs == 0,
          fmt("%d instances, %d trace diffs, %d query-count diffs (%zu trace bytes)", instances,
              trace_diffs, query_diffs, bytes)};
}

struct HalfStats {
  std::size_t attacked = 0, successes = 0;
  std::uint64_t stage_two = 0;
  double mean() const { return attacked ? static_cast<double>(stage_two) / attacked : 0.0; }
};

HalfStats second_half(const ba::CampaignReport& r) {
  HalfStats s;
  for (std::size_t i = r.documents.size() / 2; i < r.documents.size(); ++i) {
    const auto& o = r.documents[i].outcome;
    if (!o) continue;
    ++s.attacked;
    s.successes += o->success;
    s.stage_two += o->stage_two_queries;
  }
  return s;
}

Verdict query_reduction() {
  const auto& w = ToyWorld::get();
  const auto t0 = Clock::now();
  ba::CampaignOptions pruned_opts, base_opts;
  pruned_opts.attack.gamma = 0.3;
  pruned_opts.attack.alpha = 0.3;
  base_opts.attack.pruning_enabled = false;
  const auto pruned = ba::run_campaign(w.attack, *w.nb, lexicon(), w.filter, pruned_opts);
  const auto base = ba::run_campaign(w.attack, *w.nb, lexicon(), w.filter, base_opts);
  const double elapsed = seconds_since(t0);
  const auto hp = second_half(pruned.report), hb = second_half(base.report);
  const double reduction = 1.0 - hp.mean() / hb.mean();
  const double sr_p = static_cast<double>(pruned.report.success_count) / pruned.report.attacked;
  const double sr_b = static_cast<double>(base.report.success_count) / base.report.attacked;
  const bool ok = reduction >= 0.15 && std::abs(sr_p - sr_b) <= 0.05 && elapsed < 60.0;
  return {ok, fmt("second-half stage-two mean %.2f vs baseline %.2f (%.1f%% fewer); success "
                  "%.1f%% vs %.1f%% (second half %zu/%zu vs %zu/%zu); %.2fs",
                  hp.mean(), hb.mean(), 100.0 * reduction, 100.0 * sr_p, 100.0 * sr_b,
                  hp.successes, hp.attacked, hb.successes, hb.attacked, elapsed)};
}

Verdict budget_invariant() {
  const auto& w = ToyWorld::get();
  const std::vector<std::uint64_t> budgets{30, 90, 150};
  const auto sweep = ba::budget_sweep(w.attack, *w.nb, lexicon(), w.filter, {}, budgets);

  // Independent per-document counters.
  std::string counts;
  bool within = true, monotone = true;
  std::size_t prev = 0;
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    ba::AttackConfig cfg;
    cfg.query_budget = budgets[b];
    ba::HistoryTable table;
    std::uint64_t worst = 0;
    std::size_t successes = 0;
    for (const auto& d : w.attack) {
      if (w.nb->predict(d.tokens).hard_label() != d.label) continue;
      ba::testing::CountingClassifier counter(*w.nb);
      ba::VictimHandle h(counter, budgets[b]);
      const auto r = ba::attack_document(d, h, table, lexicon(), w.filter, cfg);
      worst = std::max(worst, counter.calls());
      successes += r.outcome.success;
    }
    within = within && worst <= budgets[b] && sweep.points[b].max_document_queries <= budgets[b];
    monotone = monotone && successes >= prev && successes == sweep.points[b].success_count;
    prev = successes;
    counts += fmt("%sQ=%llu: %zu successes, max delta %llu", b ? "; " : "",
                  static_cast<unsigned long long>(budgets[b]), successes,
                  static_cast<unsigned long long>(worst));
  }
  return {within && monotone, counts};
}

Verdict conservation() {
  const auto& w = ToyWorld::get();
  ba::CampaignOptions opts;
  opts.shuffle_seed = 99;
  ba::testing::CountingClassifier counter(*w.nb);
  const auto a = ba::run_campaign(w.attack, counter, lexicon(), w.filter, opts);
  const auto b = ba::run_campaign(w.attack, *w.nb, lexicon(), w.filter, opts);
  // Screening is exactly one query per document and is not an attack query.
  const std::uint64_t delta = counter.calls() - w.attack.size();
  const bool screening_ok = a.report.screening_queries == w.attack.size();
  const double product = a.report.mean_queries * static_cast<double>(a.report.attacked);
  const bool exact = product == static_cast<double>(delta) && a.report.total_queries == delta;
  bool traces_equal = a.traces.size() == b.traces.size();
  for (std::size_t i = 0; traces_equal && i < a.traces.size(); ++i)
    traces_equal = a.traces[i].to_jsonl() == b.traces[i].to_jsonl();
  const bool identical = a.report.to_json() == b.report.to_json() &&
                         a.table.to_json() == b.table.to_json() && traces_equal;
  return {exact && screening_ok && identical,
          fmt("mean_queries x attacked = %.17g, counter delta = %llu, total_queries = %llu; "
              "reports/tables/traces byte-identical across runs: %s",
              product, static_cast<unsigned long long>(delta),
              static_cast<unsigned long long>(a.report.total_queries), identical ? "yes" : "no")};
}

Verdict persistence() {
  const auto& w = ToyWorld::get();
  const auto run = ba::run_campaign(w.attack, *w.nb, lexicon(), w.filter, {});
  const auto dir = std::filesystem::temp_directory_path() / "bufferattack_acceptance";
  std::filesystem::create_directories(dir);
  run.table.save(dir / "table.json");
  const auto loaded = ba::HistoryTable::load(dir / "table.json");
  std::filesystem::remove_all(dir);

  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick_doc(0, w.attack.size() - 1);
  std::uniform_int_distribution<int> pick_label(0, 1);
  std::uniform_real_distribution<double> g(0.05, 1.0), a(0.05, 0.5);
  int mismatches = 0, from_history = 0;
  const int lookups = 1000;
  for (int i = 0; i < lookups; ++i) {
    const auto& d = w.attack[pick_doc(rng)];
    std::uniform_int_distribution<std::size_t> pick_tok(0, d.tokens.size() - 1);
    const std::string& word = d.tokens[pick_tok(rng)];
    const int label = pick_label(rng);
    const double gamma = g(rng), alpha = a(rng);
    const auto& syn = lexicon().synonyms(word);
    const auto before = ba::candidate_list(word, run.table, label, gamma, alpha, syn);
    const auto after = ba::candidate_list(word, loaded, label, gamma, alpha, syn);
    mismatches += !(before == after);
    from_history += before.source == ba::CandidateList::Source::kHistory;
  }
  const bool same_table = loaded == run.table;
  return {mismatches == 0 && same_table,
          fmt("%d lookups (%d history-backed), %d mismatches; %zu samples over %zu keys "
              "round-tripped %s",
              lookups, from_history, mismatches, run.table.sample_count(),
              run.table.key_count(), same_table ? "exactly" : "with differences")};
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  const struct {
    const char* title;
    Verdict (*check)();
  } criteria[] = {{"statistics oracle", statistics_oracle},
                  {"candidate pruning oracle", pruning_oracle},
                  {"baseline equivalence", baseline_equivalence},
                  {"query reduction", query_reduction},
                  {"budget invariant", budget_invariant},
                  {"conservation and determinism", conservation},
                  {"persistence", persistence}};
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  ToyWorld::get();
  for (int i = 1; i <= 7; ++i)
    if (!only || only == i) report(i, criteria[i - 1].title, criteria[i - 1].check);
  if (!only)
    std::printf("[SKIP] 8 wire loopback: needs the external victim server, not part of this build\n");
  std::printf("%s: %d failing criteria\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
