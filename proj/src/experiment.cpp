#include "earlybird/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "earlybird/error.hpp"
#include "earlybird/log.hpp"

namespace earlybird::experiment {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(std::string_view s) {
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw DataError("bad number in results: " + std::string(s));
  return v;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + '"';
}

void write_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << text;
  if (!out) throw Error("write failed: " + file.string());
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot read " + file.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

sampling::SamplingPolicy policy_from_json(const json& j) {
  sampling::SamplingPolicy p;
  if (j.is_string()) {
    p.kind = sampling::policy_kind_from_string(j.get<std::string>());
    return p;
  }
  if (!j.is_object()) throw ConfigError("policy entries must be strings or objects");
  for (const auto& [k, v] : j.items())
    if (k != "kind" && k != "window" && k != "per_class_cap" && k != "source_project")
      throw ConfigError("unknown policy key: " + k);
  p.kind = sampling::policy_kind_from_string(j.at("kind").get<std::string>());
  p.window = j.value("window", p.window);
  p.per_class_cap = j.value("per_class_cap", p.per_class_cap);
  if (j.contains("source_project")) p.source_project = j.at("source_project").get<std::string>();
  return p;
}

json policy_to_json(const sampling::SamplingPolicy& p) {
  json j{{"kind", sampling::to_string(p.kind)}, {"window", p.window}, {"per_class_cap", p.per_class_cap}};
  if (p.source_project) j["source_project"] = *p.source_project;
  return j;
}

json learner_to_json(const LearnerChoice& l) {
  if (l.kind == LearnerChoice::Kind::dodge)
    return {{"optimizer", "DODGE"}, {"n1", l.dodge.n1}, {"n2", l.dodge.n2}, {"epsilon", l.dodge.epsilon},
            {"goal", l.dodge.goal}};
  return learners::spec_to_json(l.spec);
}

struct Task {
  const Project* project;
  sampling::SamplingPolicy policy;
  LearnerChoice learner;
};

struct TaskOutput {
  std::vector<ResultRow> rows;
  std::optional<FailureRow> failure;
  std::size_t trainings = 0;
};

learners::TrainedModel fit(const LearnerChoice& l, const FeatureMatrix& train, std::uint64_t seed) {
  if (l.kind == LearnerChoice::Kind::dodge) return dodge::dodge(train, l.dodge, seed).model;
  return learners::train(l.spec, train, seed);
}

TaskOutput run_task(const Task& t, const std::vector<Project>& projects, const ExperimentConfig& config) {
  TaskOutput out;
  const auto kind = t.policy.kind;
  const bool manual = sampling::is_manual(kind);
  const std::string clf = manual ? "-" : t.learner.name();
  std::uint64_t seed = fnv1a(t.project->name + "|" + t.policy.name() + "|" + clf, config.seed * 0x9E3779B97F4A7C15ULL);
  try {
    const Project* source = nullptr;
    if (sampling::is_cross(kind)) {
      for (const auto& p : projects)
        if (p.name == *t.policy.source_project) source = &p;
      if (!source) throw ConfigError("source project not loaded: " + *t.policy.source_project);
    }
    const auto splits = sampling::make_splits(*t.project, t.policy, seed, source);

    std::optional<learners::TrainedModel> model;
    std::size_t train_rows = 0;
    for (const auto& split : splits) {
      FeatureMatrix test;
      learners::Prediction pred;
      if (manual) {
        test = split.test;
        pred = learners::manual_predict(test, kind == sampling::PolicyKind::MANUAL_UP);
      } else {
        if (!model || sampling::retrains_per_release(kind)) {
          sampling::TrainTestSplit capped = split;
          if (t.learner.kind == LearnerChoice::Kind::dodge && capped.train.size() > config.optimizer_max_commits) {
            std::vector<std::size_t> keep;
            for (std::size_t i = capped.train.size() - config.optimizer_max_commits; i < capped.train.size(); ++i)
              keep.push_back(i);
            capped.train = capped.train.select_rows(keep);
          }
          auto prepared = sampling::prepare(capped, seed);
          model = fit(t.learner, prepared.train, seed);
          train_rows = prepared.train.size();
          ++out.trainings;
          test = std::move(prepared.test);
        } else {
          test = split.test.select_columns(model->feature_names);
        }
        pred = learners::predict(*model, test);
      }
      const auto r = metrics::evaluate(pred.probabilities, pred.labels, test.labels);
      if (!r) continue;  // no defects in this release: recall undefined
      out.rows.push_back({t.project->name, split.release.tag, t.policy.name(), clf, *r, manual ? 0 : train_rows});
    }
  } catch (const Error& e) {
    out.failure = FailureRow{t.project->name, t.policy.name(), clf, e.what()};
  }
  return out;
}

bool same_result(const metrics::EvalResult& a, const metrics::EvalResult& b) {
  return a.recall == b.recall && a.pf == b.pf && a.auc == b.auc && a.d2h == b.d2h && a.brier == b.brier &&
         a.g_measure == b.g_measure && a.ifa == b.ifa && a.mcc == b.mcc && a.notes == b.notes;
}

}  // namespace

std::string LearnerChoice::name() const {
  if (kind == Kind::dodge) return "DODGE";
  const auto defaults = learners::default_spec(spec.algorithm);
  std::string n = spec.display_name();
  if (spec.hyperparams != defaults.hyperparams) n += "#" + hex(fnv1a(learners::spec_to_json(spec).dump())).substr(0, 6);
  return n;
}

LearnerChoice learner_from_json(const json& j) {
  LearnerChoice l;
  const bool is_dodge = (j.is_string() && j.get<std::string>() == "DODGE") ||
                        (j.is_object() && j.value("optimizer", std::string()) == "DODGE");
  if (j.is_string() && (j.get<std::string>() == "HYPEROPT" || j.get<std::string>() == "TPE"))
    throw ConfigError("the HYPEROPT treatment is reserved and not implemented");
  if (is_dodge) {
    l.kind = LearnerChoice::Kind::dodge;
    if (j.is_object()) {
      l.dodge.n1 = j.value("n1", l.dodge.n1);
      l.dodge.n2 = j.value("n2", l.dodge.n2);
      l.dodge.epsilon = j.value("epsilon", l.dodge.epsilon);
      l.dodge.goal = j.value("goal", l.dodge.goal);
      l.dodge.direction = metrics::metric_info(l.dodge.goal).direction;
    }
    l.dodge.validate();
    return l;
  }
  l.spec = learners::spec_from_json(j);
  return l;
}

void ExperimentConfig::validate() const {
  if (projects.empty()) throw ConfigError("config: projects must not be empty");
  if (policies.empty()) throw ConfigError("config: policies must not be empty");
  if (classifiers.empty()) throw ConfigError("config: classifiers must not be empty");
  if (optimizer_max_commits == 0) throw ConfigError("config: optimizer_max_commits must be > 0");
  for (const auto& p : policies) p.validate();
  for (const auto& m : metrics) metrics::metric_info(m);
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{"projects", "policies", "classifiers", "metrics", "seed",
                                           "optimizer_max_commits"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ConfigError("unknown config key: " + k);
  ExperimentConfig c;
  try {
    for (const auto& p : j.at("projects")) {
      std::filesystem::path path = p.get<std::string>();
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      c.projects.push_back(path.lexically_normal().string());
    }
    for (const auto& p : j.at("policies")) c.policies.push_back(policy_from_json(p));
    for (const auto& l : j.at("classifiers")) c.classifiers.push_back(learner_from_json(l));
    if (j.contains("metrics")) c.metrics = j.at("metrics").get<std::vector<std::string>>();
    c.seed = j.value("seed", c.seed);
    c.optimizer_max_commits = j.value("optimizer_max_commits", c.optimizer_max_commits);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  json j;
  try {
    j = json::parse(read_file(file));
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + file.string() + ": " + e.what());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(j, file.parent_path());
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["projects"] = c.projects;
  j["policies"] = json::array();
  for (const auto& p : c.policies) j["policies"].push_back(policy_to_json(p));
  j["classifiers"] = json::array();
  for (const auto& l : c.classifiers) j["classifiers"].push_back(learner_to_json(l));
  j["metrics"] = c.metrics;
  j["seed"] = c.seed;
  j["optimizer_max_commits"] = c.optimizer_max_commits;
  return j;
}

std::string config_hash(const ExperimentConfig& config) { return hex(fnv1a(config_to_json(config).dump())); }

MinedProject mine_project(const std::filesystem::path& repo_path, const MiningConfig& config) {
  GitRepository repo(repo_path);
  MinedProject m;
  auto commits = enumerate_commits(repo, config);
  const std::size_t before = commits.size();
  commits = filter_merges(std::move(commits));
  m.merges_removed = before - commits.size();
  labeler::GitBlame blame(repo, config.ignore_whitespace);
  m.project.commits = labeler::label_dataset(commits, blame, {config.defect_keywords, config.ignore_whitespace}, &m.trace);
  m.project.releases = extract_releases(repo);
  labeler::assign_releases(m.project.commits, m.project.releases);
  m.sanity = sanity_check(m.project.commits, m.project.releases, has_license_file(repo));
  auto name = std::filesystem::weakly_canonical(repo_path).filename().string();
  m.project.name = name.empty() ? "project" : name;
  return m;
}

bool ResultStore::operator==(const ResultStore& o) const {
  if (rows.size() != o.rows.size() || failures.size() != o.failures.size()) return false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto &a = rows[i], &b = o.rows[i];
    if (a.project != b.project || a.release != b.release || a.policy != b.policy || a.classifier != b.classifier ||
        a.train_rows != b.train_rows || !same_result(a.result, b.result))
      return false;
  }
  for (std::size_t i = 0; i < failures.size(); ++i)
    if (failures[i].project != o.failures[i].project || failures[i].policy != o.failures[i].policy ||
        failures[i].classifier != o.failures[i].classifier || failures[i].message != o.failures[i].message)
      return false;
  return trainings == o.trainings;
}

std::string results_csv(const ResultStore& store) {
  std::string out = "project,release,policy,classifier";
  for (const auto& m : metrics::all_metrics()) out += "," + std::string(m.name);
  out += ",train_rows,notes\n";
  for (const auto& r : store.rows) {
    out += quote(r.project) + ',' + quote(r.release) + ',' + quote(r.policy) + ',' + quote(r.classifier);
    for (const auto& m : metrics::all_metrics()) out += ',' + format_double(metrics::metric_value(r.result, m.name));
    std::string notes;
    for (const auto& n : r.result.notes) notes += (notes.empty() ? "" : ";") + n;
    out += ',' + std::to_string(r.train_rows) + ',' + quote(notes) + '\n';
  }
  return out;
}

ResultStore parse_results_csv(const std::string& text) {
  ResultStore s;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  const auto header = split_fields(line);
  const auto metric_list = metrics::all_metrics();
  if (header.size() != 6 + metric_list.size() || header[0] != "project")
    throw DataError("unexpected results header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != header.size()) throw DataError("bad results row: " + line);
    ResultRow r{f[0], f[1], f[2], f[3], {}, 0};
    double v[8];
    for (std::size_t k = 0; k < 8; ++k) v[k] = parse_double(f[4 + k]);
    for (std::size_t k = 0; k < metric_list.size(); ++k) {
      const auto name = metric_list[k].name;
      double& slot = name == "recall"      ? r.result.recall
                     : name == "pf"        ? r.result.pf
                     : name == "auc"       ? r.result.auc
                     : name == "d2h"       ? r.result.d2h
                     : name == "brier"     ? r.result.brier
                     : name == "g_measure" ? r.result.g_measure
                     : name == "ifa"       ? r.result.ifa
                                           : r.result.mcc;
      slot = v[k];
    }
    r.train_rows = static_cast<std::size_t>(parse_double(f[12]));
    std::string notes = f[13];
    std::size_t start = 0;
    while (!notes.empty() && start <= notes.size()) {
      const auto semi = notes.find(';', start);
      r.result.notes.push_back(notes.substr(start, semi == std::string::npos ? std::string::npos : semi - start));
      if (semi == std::string::npos) break;
      start = semi + 1;
    }
    s.rows.push_back(std::move(r));
  }
  return s;
}

void save_store(const ResultStore& store, const ExperimentConfig& config, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "results.csv", results_csv(store));
  std::string failures = "project,policy,classifier,message\n";
  for (const auto& f : store.failures)
    failures += quote(f.project) + ',' + quote(f.policy) + ',' + quote(f.classifier) + ',' + quote(f.message) + '\n';
  write_file(dir / "failures.csv", failures);

  json manifest;
  const auto path = dir / "manifest.json";
  if (std::filesystem::exists(path)) {
    try {
      manifest = json::parse(read_file(path));
    } catch (const json::exception&) {
      manifest = json::object();
    }
  }
  manifest["format_version"] = 1;
  manifest["config"] = config_to_json(config);
  manifest["config_hash"] = store.config_hash;
  manifest["seed"] = store.seed;
  manifest["trainings"] = store.trainings;
  manifest["rows"] = store.rows.size();
  manifest["failures"] = store.failures.size();
  if (!manifest.contains("runs")) manifest["runs"] = json::array();
  manifest["runs"].push_back({{"config_hash", store.config_hash}, {"seed", store.seed}, {"rows", store.rows.size()}});
  write_file(path, manifest.dump(2) + "\n");
}

ResultStore load_store(const std::filesystem::path& dir) {
  ResultStore s = parse_results_csv(read_file(dir / "results.csv"));
  const auto failures = dir / "failures.csv";
  if (std::filesystem::exists(failures)) {
    std::istringstream in(read_file(failures));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_fields(line);
      if (f.size() == 4) s.failures.push_back({f[0], f[1], f[2], f[3]});
    }
  }
  const auto manifest = dir / "manifest.json";
  if (std::filesystem::exists(manifest)) {
    const json m = json::parse(read_file(manifest));
    s.config_hash = m.value("config_hash", std::string());
    s.seed = m.value("seed", std::uint64_t{0});
    if (m.contains("trainings")) s.trainings = m.at("trainings").get<std::map<std::string, std::size_t>>();
  }
  return s;
}

bool store_matches(const std::filesystem::path& dir, const ExperimentConfig& config) {
  const auto manifest = dir / "manifest.json";
  if (!std::filesystem::exists(manifest) || !std::filesystem::exists(dir / "results.csv")) return false;
  try {
    const json m = json::parse(read_file(manifest));
    return m.value("config_hash", std::string()) == config_hash(config) &&
           m.value("seed", std::uint64_t{0}) == config.seed;
  } catch (const json::exception&) {
    return false;
  }
}

std::vector<Project> load_projects(const ExperimentConfig& config) {
  std::vector<Project> out;
  for (const auto& p : config.projects) {
    const std::filesystem::path path(p);
    if (path.extension() == ".csv") {
      out.push_back(load_project(path));
    } else {
      auto mined = mine_project(path, default_mining_config());
      if (!mined.sanity.accepted) {
        std::string v;
        for (const auto& x : mined.sanity.violations) v += " " + x;
        log::warn(mined.project.name + " fails sanity checks:" + v);
      }
      out.push_back(std::move(mined.project));
    }
  }
  return out;
}

ResultStore run_experiment(const ExperimentConfig& config, const std::vector<Project>& projects, int jobs) {
  config.validate();
  std::vector<Task> tasks;
  for (const auto& project : projects)
    for (const auto& policy : config.policies) {
      if (policy.source_project && *policy.source_project == project.name) continue;
      if (sampling::is_manual(policy.kind)) {
        tasks.push_back({&project, policy, config.classifiers.front()});
        continue;
      }
      for (const auto& l : config.classifiers) tasks.push_back({&project, policy, l});
    }

  std::vector<TaskOutput> outputs(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) outputs[i] = run_task(tasks[i], projects, config);
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ResultStore store;
  store.config_hash = config_hash(config);
  store.seed = config.seed;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    auto& o = outputs[i];
    const std::string clf = sampling::is_manual(tasks[i].policy.kind) ? "-" : tasks[i].learner.name();
    store.trainings[tasks[i].project->name + "|" + tasks[i].policy.name() + "/" + clf] = o.trainings;
    for (auto& r : o.rows) store.rows.push_back(std::move(r));
    if (o.failure) store.failures.push_back(*o.failure);
  }
  return store;
}

std::vector<stats::Population> populations(const ResultStore& store, const std::vector<std::string>& metric_names) {
  std::vector<std::string> names = metric_names;
  if (names.empty())
    for (const auto& m : metrics::all_metrics()) names.emplace_back(m.name);
  std::map<std::string, std::vector<const ResultRow*>> by_treatment;
  for (const auto& r : store.rows) by_treatment[r.treatment()].push_back(&r);
  std::vector<stats::Population> out;
  for (const auto& m : names) {
    const auto& info = metrics::metric_info(m);
    for (const auto& [t, rows] : by_treatment) {
      stats::Population p{t, {}, m, info.direction};
      for (const auto* r : rows) p.scores.push_back(metrics::metric_value(r->result, m));
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace earlybird::experiment
