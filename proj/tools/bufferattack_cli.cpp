// bufferattack: command-line front end for training desk-scale victims,
// running attack campaigns and budget sweeps, and scoring transferability.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "bufferattack/attack.hpp"
#include "bufferattack/campaign.hpp"
#include "bufferattack/dataset.hpp"
#include "bufferattack/victim.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace bufferattack;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kProtocol = 3 };

const std::string kDataDir = BUFFERATTACK_DATA_DIR;

struct VictimOptions {
  std::string model_path;
  std::string endpoint;
  int num_classes = 2;
  int timeout_ms = 5000;
};

struct AttackOptions {
  VictimOptions victim;
  std::string data;
  std::string embeddings = kDataDir + "/embeddings.txt";
  std::string stopwords = kDataDir + "/stopwords.txt";
  std::string table;
  std::string warm_table;
  std::string out;
  bool baseline = false;
  bool shuffle = false;
  AttackConfig cfg;
  std::uint64_t budget = 0;
};

void add_victim_options(CLI::App* cmd, VictimOptions& v) {
  auto* m = cmd->add_option("--victim", v.model_path, "Saved model file (from train-victim)");
  auto* e = cmd->add_option("--endpoint", v.endpoint, "Remote model base URL");
  m->excludes(e);
  cmd->add_option("--num-classes", v.num_classes, "Class count of a remote model");
  cmd->add_option("--timeout-ms", v.timeout_ms, "Remote request timeout");
}

void add_attack_options(CLI::App* cmd, AttackOptions& o) {
  add_victim_options(cmd, o.victim);
  cmd->add_option("--data", o.data, "Dataset (JSON Lines)")->required();
  cmd->add_option("--embeddings", o.embeddings, "Word-vector file");
  cmd->add_option("--stopwords", o.stopwords, "Stopword list");
  cmd->add_option("--gamma", o.cfg.gamma, "Candidate list ratio");
  cmd->add_option("--alpha", o.cfg.alpha, "Significance level of the pruning test");
  cmd->add_option("--epsilon", o.cfg.epsilon, "Fraction of target words attacked");
  cmd->add_option("--top-n", o.cfg.synonym_top_n, "Synonyms per word");
  cmd->add_option("--min-sim", o.cfg.synonym_min_sim, "Synonym cosine threshold");
  cmd->add_option("--budget", o.budget, "Per-document query budget");
  cmd->add_option("--warm-table", o.warm_table, "History table to start from");
  cmd->add_flag("--baseline", o.baseline, "Disable pruning (full synonym sets)");
  cmd->add_flag("--scan-all", o.cfg.scan_all_candidates,
                "Query every candidate of a word before checking for label flips");
  cmd->add_option("--seed", o.cfg.seed, "Seed (document shuffling)");
  cmd->add_flag("--shuffle", o.shuffle, "Shuffle document order with --seed");
}

std::shared_ptr<const EmbeddingTable> load_table(const std::string& path) {
  spdlog::info("loading embeddings from {}", path);
  return std::make_shared<const EmbeddingTable>(EmbeddingTable::load(path));
}

std::unique_ptr<Classifier> make_victim(const VictimOptions& v,
                                        std::shared_ptr<const EmbeddingTable> table) {
  if (!v.endpoint.empty())
    return std::make_unique<RemoteClassifier>(
        RemoteModelConfig{v.endpoint, v.timeout_ms, v.num_classes});
  if (v.model_path.empty()) throw ConfigError("one of --victim or --endpoint is required");
  return load_model(v.model_path, std::move(table));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_campaign(const fs::path& dir, const CampaignResult& r, const std::string& table_path) {
  fs::create_directories(dir);
  write_text(dir / "report.json", r.report.to_json());
  save_dataset(dir / "adversarial.jsonl", r.adversarial);
  std::string traces;
  for (const auto& t : r.traces) traces += t.to_jsonl();
  write_text(dir / "traces.jsonl", traces);
  r.table.save(table_path.empty() ? dir / "table.json" : fs::path(table_path));
}

struct Campaign {
  std::shared_ptr<const EmbeddingTable> table;
  std::unique_ptr<Classifier> victim;
  std::unique_ptr<Lexicon> lexicon;
  TargetFilter filter;
  std::vector<Document> data;
  std::optional<HistoryTable> warm;
  CampaignOptions options;
};

Campaign prepare(AttackOptions& o) {
  Campaign c;
  o.cfg.pruning_enabled = !o.baseline;
  if (o.budget) o.cfg.query_budget = o.budget;
  validate_config(o.cfg);
  c.table = load_table(o.embeddings);
  c.victim = make_victim(o.victim, c.table);
  c.lexicon = std::make_unique<Lexicon>(c.table, o.cfg.synonym_top_n, o.cfg.synonym_min_sim);
  c.filter = TargetFilter(load_word_list(o.stopwords));
  c.data = load_dataset(o.data);
  if (!o.warm_table.empty()) c.warm = HistoryTable::load(o.warm_table);
  c.options.attack = o.cfg;
  c.options.warm_table = c.warm ? &*c.warm : nullptr;
  if (o.shuffle) c.options.shuffle_seed = o.cfg.seed;
  return c;
}

std::vector<std::uint64_t> parse_budgets(const std::string& csv) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw ConfigError("bad budget '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("--budgets needs at least one value");
  return out;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("bufferattack");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("BUFFERATTACK_LOG")) spdlog::cfg::helpers::load_levels(env);
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Query-efficient black-box word-substitution attacks on text classifiers"};
  app.require_subcommand(1);

  // train-victim
  std::string arch, train_data, train_out, train_embeddings = kDataDir + "/embeddings.txt";
  int train_classes = 0, epochs = 300;
  double smoothing = 1.0, lr = 0.5;
  std::uint64_t train_seed = 0;
  auto* train = app.add_subcommand("train-victim", "Train a naive Bayes or logistic-regression victim");
  train->add_option("--arch", arch, "nb | logreg")->required()->check(CLI::IsMember({"nb", "logreg"}));
  train->add_option("--data", train_data, "Training corpus (JSON Lines)")->required();
  train->add_option("--out", train_out, "Model output path")->required();
  train->add_option("--embeddings", train_embeddings, "Word vectors (logreg)");
  train->add_option("--num-classes", train_classes, "Defaults to max label + 1 (at least 2)");
  train->add_option("--smoothing", smoothing, "Laplace constant (nb)");
  train->add_option("--epochs", epochs, "Gradient steps (logreg)");
  train->add_option("--lr", lr, "Learning rate (logreg)");
  train->add_option("--seed", train_seed, "Recorded with the model");

  // attack
  AttackOptions attack_opts;
  auto* attack = app.add_subcommand("attack", "Attack every document of a dataset");
  add_attack_options(attack, attack_opts);
  attack->add_option("--table", attack_opts.table, "History table output (default DIR/table.json)");
  attack->add_option("--out", attack_opts.out, "Run directory")->required();

  // sweep
  AttackOptions sweep_opts;
  std::string budgets_csv;
  auto* sweep = app.add_subcommand("sweep", "Success counts under a list of query budgets");
  add_attack_options(sweep, sweep_opts);
  sweep->add_option("--budgets", budgets_csv, "Comma-separated ascending budgets")->required();
  sweep->add_option("--out", sweep_opts.out, "Directory for sweep.json");

  // transfer
  VictimOptions transfer_victim;
  std::string adv_path, transfer_embeddings = kDataDir + "/embeddings.txt";
  auto* transfer = app.add_subcommand("transfer", "Accuracy of a victim on saved adversarial texts");
  transfer->add_option("--adv", adv_path, "Adversarial dataset (adversarial.jsonl)")->required();
  transfer->add_option("--embeddings", transfer_embeddings, "Word vectors (logreg victims)");
  add_victim_options(transfer, transfer_victim);

  // report
  std::string run_dir, queries_over = "attacked";
  bool as_json = false;
  auto* report = app.add_subcommand("report", "Summarize a finished attack run");
  report->add_option("--run", run_dir, "Run directory written by attack")->required();
  report->add_flag("--json", as_json, "Print the machine-readable summary");
  report->add_option("--queries-over", queries_over, "attacked | successful")
      ->check(CLI::IsMember({"attacked", "successful"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*train) {
      auto corpus = load_dataset(train_data);
      if (corpus.empty()) throw ConfigError("training corpus is empty");
      int k = train_classes;
      if (k == 0) {
        for (const auto& d : corpus) k = std::max(k, d.label + 1);
        k = std::max(k, 2);
      }
      if (arch == "nb") {
        save_model(train_out, NaiveBayesModel::train(corpus, k, smoothing));
      } else {
        auto table = load_table(train_embeddings);
        const auto model = LogRegModel::train(corpus, table, k, {epochs, lr, train_seed});
        save_model(train_out, model, fs::absolute(train_embeddings).string());
      }
      std::cout << "wrote " << train_out << "\n";
    } else if (*attack) {
      Campaign c = prepare(attack_opts);
      try {
        const auto r = run_campaign(c.data, *c.victim, *c.lexicon, c.filter, c.options);
        write_campaign(attack_opts.out, r, attack_opts.table);
        std::cout << render_report(r.report, QueryAveraging::kAttacked);
      } catch (const CampaignAborted& e) {
        write_campaign(attack_opts.out, e.partial(), attack_opts.table);
        std::cerr << "aborted: " << e.what() << " (partial report written)\n";
        return e.protocol() ? kProtocol : kIo;
      }
    } else if (*sweep) {
      Campaign c = prepare(sweep_opts);
      const auto budgets = parse_budgets(budgets_csv);
      const auto r = budget_sweep(c.data, *c.victim, *c.lexicon, c.filter, c.options, budgets);
      std::cout << "Q_max  successes  attacked  max_doc_queries\n";
      for (const auto& p : r.points)
        std::cout << p.budget << "  " << p.success_count << "  " << p.attacked << "  "
                  << p.max_document_queries << "\n";
      if (!sweep_opts.out.empty()) {
        fs::create_directories(sweep_opts.out);
        write_text(fs::path(sweep_opts.out) / "sweep.json", r.to_json());
      }
    } else if (*transfer) {
      std::shared_ptr<const EmbeddingTable> table;
      if (transfer_victim.endpoint.empty()) table = load_table(transfer_embeddings);
      const auto victim = make_victim(transfer_victim, table);
      const auto docs = load_dataset(adv_path);
      const auto r = evaluate_transfer(docs, *victim);
      std::cout << nlohmann::json{{"total", r.total},
                                  {"correct", r.correct},
                                  {"accuracy", r.accuracy},
                                  {"queries", r.queries}}
                       .dump()
                << "\n";
    } else if (*report) {
      const auto r = CampaignReport::from_json(read_text(fs::path(run_dir) / "report.json"));
      const auto avg = queries_over == "attacked" ? QueryAveraging::kAttacked
                                                  : QueryAveraging::kSuccessful;
      if (as_json) {
        std::cout << nlohmann::json{{"original_accuracy", r.original_accuracy},
                                    {"adv_accuracy", r.adv_accuracy},
                                    {"perturbed", r.mean_perturbation},
                                    {"query_num", avg == QueryAveraging::kAttacked
                                                      ? r.mean_queries
                                                      : r.mean_queries_successful},
                                    {"semantic_sim", r.mean_similarity},
                                    {"attacked", r.attacked},
                                    {"success_count", r.success_count},
                                    {"queries_over", queries_over}}
                         .dump(2)
                  << "\n";
      } else {
        std::cout << render_report(r, avg);
      }
    }
  } catch (const ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kProtocol;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}
