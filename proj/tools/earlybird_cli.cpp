// earlybird: mine repositories, profile defect density, run and rank
// sampling-policy experiments, search for bellwether projects.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "earlybird/dataset.hpp"
#include "earlybird/error.hpp"
#include "earlybird/experiment.hpp"
#include "earlybird/git_miner.hpp"
#include "earlybird/log.hpp"
#include "earlybird/sampling.hpp"
#include "earlybird/stats.hpp"

namespace fs = std::filesystem;
using namespace earlybird;

namespace {

constexpr int kOk = 0;
constexpr int kSanityRejected = 2;
constexpr int kConfigError = 3;
constexpr int kPartialFailure = 4;

struct Options {
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::string config;
  std::string out;
  int jobs = 1;
  bool force = false;
  bool quiet = false;

  std::string repo;
  std::string dataset;
  std::string results;
  std::size_t window = 150;
  std::vector<std::string> metrics;
  std::string mining_config;
};

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << text;
}

experiment::ExperimentConfig load(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  auto c = experiment::load_config(o.config);
  if (o.seed_given) c.seed = o.seed;
  return c;
}

int cmd_mine(const Options& o) {
  const MiningConfig& cfg = o.mining_config.empty() ? default_mining_config() : [&]() -> const MiningConfig& {
    static MiningConfig loaded = load_mining_config(o.mining_config);
    return loaded;
  }();
  const fs::path out_dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  fs::create_directories(out_dir);
  const std::string name = fs::weakly_canonical(o.repo).filename().string();
  const fs::path csv = out_dir / (name + ".csv");
  if (fs::exists(csv) && !o.force) {
    std::cout << csv.string() << " exists; use --force to mine again\n";
    return kOk;
  }

  GitRepository repo(o.repo);
  auto commits = filter_merges(enumerate_commits(repo, cfg));
  labeler::GitBlame blame(repo, cfg.ignore_whitespace);
  labeler::TraceStats trace;
  auto labeled = labeler::label_dataset(commits, blame, {cfg.defect_keywords, cfg.ignore_whitespace}, &trace);
  const auto releases = extract_releases(repo);
  labeler::assign_releases(labeled, releases);
  const auto sanity = sanity_check(labeled, releases, has_license_file(repo));
  if (!sanity.accepted) {
    std::cerr << name << " rejected by sanity checks:";
    for (const auto& v : sanity.violations) std::cerr << ' ' << v;
    std::cerr << '\n';
    return kSanityRejected;
  }
  write_dataset_csv(csv, labeled);
  write_releases_csv(releases_path_for(csv), releases);
  write_text(out_dir / (name + ".commits.ndjson"), to_ndjson(commits));
  std::size_t defective = 0;
  for (const auto& c : labeled) defective += c.defective ? 1 : 0;
  std::cout << name << ": " << labeled.size() << " commits, " << defective << " defective, " << releases.size()
            << " releases, " << trace.lines_traced << " lines traced -> " << csv.string() << '\n';
  return kOk;
}

int cmd_density(const Options& o) {
  const auto commits = read_dataset_csv(o.dataset);
  const auto report = density_profile(commits, o.window);
  std::cout << density_text(report);
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    write_text(fs::path(o.out) / (fs::path(o.dataset).stem().string() + ".density.csv"), density_csv(report));
  }
  return kOk;
}

int cmd_run(const Options& o) {
  const auto config = load(o);
  const fs::path out_dir = o.out.empty() ? fs::path("results") : fs::path(o.out);
  if (!o.force && experiment::store_matches(out_dir, config)) {
    std::cout << "results in " << out_dir.string() << " are up to date; use --force to rerun\n";
    return kOk;
  }
  const auto projects = experiment::load_projects(config);
  const auto store = experiment::run_experiment(config, projects, o.jobs);
  experiment::save_store(store, config, out_dir);
  std::cout << store.rows.size() << " result rows, " << store.failures.size() << " failed treatments -> "
            << out_dir.string() << '\n';
  for (const auto& f : store.failures)
    std::cerr << "failed: " << f.project << ' ' << f.policy << '/' << f.classifier << ": " << f.message << '\n';
  return store.failures.empty() ? kOk : kPartialFailure;
}

int cmd_rank(const Options& o) {
  const fs::path dir = !o.results.empty() ? fs::path(o.results) : (o.out.empty() ? fs::path("results") : fs::path(o.out));
  const auto store = experiment::load_store(dir);
  stats::SkConfig sk;
  if (o.seed_given) sk.seed = o.seed;
  const auto table = stats::rank_table(experiment::populations(store, o.metrics), sk);
  std::cout << stats::rank_text(table);
  write_text(dir / "rank.csv", stats::rank_csv(table));
  return kOk;
}

int cmd_bellwether(const Options& o) {
  const auto config = load(o);
  const auto projects = experiment::load_projects(config);
  const fs::path out_dir = o.out.empty() ? fs::path("results") : fs::path(o.out);
  fs::create_directories(out_dir);
  learners::ClassifierSpec clf = learners::default_spec(learners::Algorithm::logistic_regression);
  for (const auto& l : config.classifiers)
    if (l.kind == experiment::LearnerChoice::Kind::classifier) {
      clf = l.spec;
      break;
    }

  std::ostringstream table, timing;
  table << "policy,project,median_recall,median_pf,satisfactory,releases,training_reads\n";
  timing << "policy,seconds,training_reads,satisfactory\n";
  for (const auto& policy : config.policies) {
    const auto start = std::chrono::steady_clock::now();
    const auto entries = sampling::find_bellwethers(projects, policy, clf, config.seed);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::size_t reads = 0, good = 0;
    for (const auto& e : entries) {
      table << sampling::to_string(policy.kind) << ',' << e.project << ',' << e.median_recall << ',' << e.median_pf
            << ',' << (e.satisfactory ? 1 : 0) << ',' << e.evaluated_releases << ',' << e.training_reads << '\n';
      reads += e.training_reads;
      good += e.satisfactory ? 1 : 0;
    }
    timing << sampling::to_string(policy.kind) << ',' << seconds << ',' << reads << ',' << good << '\n';
    std::cout << sampling::to_string(policy.kind) << ": " << good << " of " << entries.size()
              << " projects satisfactory, " << reads << " training commits read, " << seconds << " s\n";
  }
  write_text(out_dir / "bellwether.csv", table.str());
  write_text(out_dir / "bellwether_timing.csv", timing.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Early-data defect prediction experiments"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Random seed")->each([&](const std::string&) { o.seed_given = true; });
    sub->add_option("--config", o.config, "Experiment config JSON");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--force", o.force, "Redo work even if outputs exist");
    sub->add_flag("-q,--quiet", o.quiet, "Suppress warnings");
  };

  auto* mine = app.add_subcommand("mine", "Mine and label a git repository into a dataset CSV");
  common(mine);
  mine->add_option("repo", o.repo, "Repository path")->required();
  mine->add_option("--mining-config", o.mining_config, "Mining config JSON (extensions, keywords)");

  auto* density = app.add_subcommand("density", "Defect density over the commit timeline");
  common(density);
  density->add_option("dataset", o.dataset, "Dataset CSV")->required();
  density->add_option("--window", o.window, "Early window size")->check(CLI::PositiveNumber);

  auto* run = app.add_subcommand("run", "Run an experiment grid");
  common(run);

  auto* rank = app.add_subcommand("rank", "Scott-Knott rank tables for stored results");
  common(rank);
  rank->add_option("results", o.results, "Results directory (defaults to --out)");
  rank->add_option("--metrics", o.metrics, "Metrics to rank");

  auto* bell = app.add_subcommand("bellwether", "Search for bellwether projects");
  common(bell);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  if (o.quiet) log::set_level(log::Level::quiet);

  try {
    if (*mine) return cmd_mine(o);
    if (*density) return cmd_density(o);
    if (*run) return cmd_run(o);
    if (*rank) return cmd_rank(o);
    if (*bell) return cmd_bellwether(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}
