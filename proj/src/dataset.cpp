#include "earlybird/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "earlybird/error.hpp"
#include "earlybird/git_miner.hpp"

namespace earlybird {

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(std::string_view s, const std::string& context) {
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw DataError("bad number '" + std::string(s) + "' " + context);
  return v;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + '"';
}

// Splits one CSV record; only the last field may be quoted.
std::vector<std::string> split_record(const std::string& line, std::size_t fields) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t f = 0; f + 1 < fields; ++f) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) return {};
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  std::string last = line.substr(start);
  if (last.size() >= 2 && last.front() == '"' && last.back() == '"') {
    std::string t;
    for (std::size_t i = 1; i + 1 < last.size(); ++i) {
      t += last[i];
      if (last[i] == '"') ++i;
    }
    last = t;
  }
  out.push_back(last);
  return out;
}

}  // namespace

const std::vector<std::string>& dataset_csv_header() {
  static const std::vector<std::string> h = [] {
    std::vector<std::string> v{"hash", "timestamp"};
    for (const auto& n : raw_feature_names()) v.push_back(n);
    v.push_back("defective");
    v.push_back("release");
    return v;
  }();
  return h;
}

std::string dataset_csv(std::span<const LabeledCommit> commits) {
  std::string out;
  const auto& header = dataset_csv_header();
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (const auto& c : commits) {
    out += c.hash;
    out += ',' + std::to_string(c.timestamp);
    for (double v : feature_vector(c.features)) out += ',' + format_double(v);
    out += c.defective ? ",1," : ",0,";
    out += quote(c.release);
    out += '\n';
  }
  return out;
}

void write_dataset_csv(const std::filesystem::path& file, std::span<const LabeledCommit> commits) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << dataset_csv(commits);
  if (!out) throw Error("write failed: " + file.string());
}

std::vector<LabeledCommit> read_dataset_csv(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot read " + file.string());
  const auto& header = dataset_csv_header();
  std::string line;
  std::getline(in, line);
  std::string expected;
  for (std::size_t i = 0; i < header.size(); ++i) expected += (i ? "," : "") + header[i];
  if (line != expected) throw DataError("unexpected dataset header in " + file.string());

  std::vector<LabeledCommit> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_record(line, header.size());
    const std::string where = "at " + file.string() + ":" + std::to_string(lineno);
    if (f.size() != header.size()) throw DataError("wrong field count " + where);
    LabeledCommit c;
    c.hash = f[0];
    c.timestamp = static_cast<Timestamp>(parse_double(f[1], where));
    double v[14];
    for (int k = 0; k < 14; ++k) v[k] = parse_double(f[static_cast<std::size_t>(2 + k)], where);
    auto& x = c.features;
    x.ns = v[0];
    x.nd = v[1];
    x.nf = v[2];
    x.entropy = v[3];
    x.la = v[4];
    x.ld = v[5];
    x.lt = v[6];
    x.fix = v[7] != 0;
    x.ndev = v[8];
    x.age = v[9];
    x.nuc = v[10];
    x.exp = v[11];
    x.rexp = v[12];
    x.sexp = v[13];
    if (f[16] != "0" && f[16] != "1") throw DataError("defective must be 0 or 1 " + where);
    c.defective = f[16] == "1";
    c.release = f[17];
    out.push_back(std::move(c));
  }
  return out;
}

FeatureMatrix Project::read(std::size_t begin, std::size_t end) const {
  end = std::min(end, commits.size());
  begin = std::min(begin, end);
  reads_->fetch_add(end - begin);
  return to_matrix(std::span<const LabeledCommit>(commits).subspan(begin, end - begin));
}

FeatureMatrix Project::read(std::span<const std::size_t> indices) const {
  std::vector<LabeledCommit> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) picked.push_back(commits.at(i));
  reads_->fetch_add(indices.size());
  return to_matrix(picked);
}

std::filesystem::path releases_path_for(const std::filesystem::path& dataset_csv) {
  auto p = dataset_csv;
  p.replace_extension(".releases.csv");
  return p;
}

Project load_project(const std::filesystem::path& dataset_csv) {
  Project p;
  p.name = dataset_csv.stem().string();
  p.commits = read_dataset_csv(dataset_csv);
  std::stable_sort(p.commits.begin(), p.commits.end(),
                   [](const LabeledCommit& a, const LabeledCommit& b) { return a.timestamp < b.timestamp; });
  const auto rel = releases_path_for(dataset_csv);
  if (std::filesystem::exists(rel)) p.releases = read_releases_csv(rel);
  std::stable_sort(p.releases.begin(), p.releases.end(),
                   [](const Release& a, const Release& b) { return a.timestamp < b.timestamp; });
  return p;
}

DensityReport density_profile(std::span<const LabeledCommit> commits, std::size_t window) {
  DensityReport r;
  r.window = window;
  r.decile_percent.assign(10, 0.0);
  const std::size_t n = commits.size();
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!commits[i].defective) continue;
    ++total;
    r.decile_percent[std::min<std::size_t>(9, i * 10 / n)] += 1;
    (i < window ? r.defects_before_window : r.defects_after_window) += 1;
  }
  if (total > 0)
    for (double& d : r.decile_percent) d = 100.0 * d / static_cast<double>(total);
  const std::size_t before = std::min(window, n), after = n - before;
  r.density_before = before ? static_cast<double>(r.defects_before_window) / static_cast<double>(before) : 0.0;
  r.density_after = after ? static_cast<double>(r.defects_after_window) / static_cast<double>(after) : 0.0;
  if (r.density_after > 0) r.ratio = r.density_before / r.density_after;
  else r.ratio = r.density_before > 0 ? std::numeric_limits<double>::infinity() : 0.0;

  static const char* const kBars[] = {"▁", "▂", "▃", "▄", "▅", "▆", "▇", "█"};
  const double top = *std::max_element(r.decile_percent.begin(), r.decile_percent.end());
  for (double d : r.decile_percent) {
    const int level = top > 0 ? static_cast<int>(std::lround(7.0 * d / top)) : 0;
    r.sparkline += kBars[level];
  }
  return r;
}

std::string density_csv(const DensityReport& r) {
  std::ostringstream out;
  out << "decile,defect_percent\n";
  for (std::size_t i = 0; i < r.decile_percent.size(); ++i)
    out << i + 1 << ',' << format_double(r.decile_percent[i]) << '\n';
  return out.str();
}

std::string density_text(const DensityReport& r) {
  std::ostringstream out;
  out << "defects by decile  " << r.sparkline << '\n';
  for (std::size_t i = 0; i < r.decile_percent.size(); ++i)
    out << "  decile " << (i + 1 < 10 ? " " : "") << i + 1 << "  " << r.decile_percent[i] << "%\n";
  out << "window " << r.window << ": " << r.defects_before_window << " defects before ("
      << r.density_before * 100 << "% of commits), " << r.defects_after_window << " after ("
      << r.density_after * 100 << "%), ratio " << r.ratio << '\n';
  return out.str();
}

}  // namespace earlybird
