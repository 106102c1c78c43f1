#include "auvid/dataset_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace auvid::io {

namespace fs = std::filesystem;

namespace {

const char* kBaseHeader = "t,du,dq,dr,theta,psi,u,q,r,duc,dqc,drc";
const char* kTruthHeader = ",px,py,pz,w";

std::vector<double> split_numbers(const std::string& line, const fs::path& file, int lineno) {
  std::vector<double> out;
  const char* p = line.c_str();
  while (*p) {
    char* end = nullptr;
    double v = std::strtod(p, &end);
    if (end == p) throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": bad number");
    out.push_back(v);
    p = end;
    if (*p == ',') ++p;
    else if (*p && *p != '\r') throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": bad separator");
    else break;
  }
  return out;
}

}  // namespace

void write_trajectory_csv(const fs::path& file, const excitation::Trajectory& traj, double delta,
                          bool with_truth) {
  std::string out;
  out.reserve(traj.outputs.size() * 200);
  out += kBaseHeader;
  if (with_truth) out += kTruthHeader;
  out += "\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    out += buf;
  };
  for (std::size_t k = 0; k < traj.outputs.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.6f", static_cast<double>(k) * delta);
    out += buf;
    for (int i = 0; i < kInputDim; ++i) put(traj.inputs[k][i]);
    for (int i = 0; i < kOutputDim; ++i) put(traj.outputs[k][i]);
    if (with_truth) {
      const State& x = traj.states[k];
      put(x[sx::px]);
      put(x[sx::py]);
      put(x[sx::pz]);
      put(x[sx::w]);
    }
    out += "\n";
  }
  atomic_write(file, out);
}

excitation::Trajectory read_trajectory_csv(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool with_truth = false;
  if (line == std::string(kBaseHeader) + kTruthHeader) with_truth = true;
  else if (line != kBaseHeader) throw std::runtime_error(file.string() + ": unexpected header");
  const std::size_t cols = with_truth ? 16 : 12;
  excitation::Trajectory t;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto v = split_numbers(line, file, lineno);
    if (v.size() != cols) throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": wrong column count");
    Input u(v[1], v[2], v[3]);
    Output y;
    for (int i = 0; i < kOutputDim; ++i) y[i] = v[4 + i];
    State x = plant::lift(y);
    if (with_truth) {
      x[sx::px] = v[12];
      x[sx::py] = v[13];
      x[sx::pz] = v[14];
      x[sx::w] = v[15];
    }
    t.inputs.push_back(u);
    t.outputs.push_back(y);
    t.states.push_back(x);
  }
  return t;
}

void write_stats(kv::Document& doc, const std::string& section,
                 const excitation::NormalizationStats& stats) {
  auto& sec = doc[section];
  for (int i = 0; i < kOutputDim; ++i) {
    sec[std::string("mean_") + kOutputNames[i]] = kv::format_double(stats.mean[i]);
    sec[std::string("std_") + kOutputNames[i]] = kv::format_double(stats.std[i]);
  }
}

excitation::NormalizationStats read_stats(const kv::SectionReader& reader) {
  excitation::NormalizationStats s;
  for (int i = 0; i < kOutputDim; ++i) {
    s.mean[i] = reader.get_double(std::string("mean_") + kOutputNames[i]);
    s.std[i] = reader.get_double(std::string("std_") + kOutputNames[i]);
    if (!(s.std[i] > 0.0)) {
      throw ConfigError(std::string("normalization std_") + kOutputNames[i] + " must be positive");
    }
  }
  return s;
}

void save_dataset(const excitation::Dataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < ds.batches.size(); ++i) {
    write_trajectory_csv(dir / ("batch_" + std::to_string(i) + ".csv"), ds.batches[i], ds.delta);
  }
  kv::Document doc;
  auto& d = doc["dataset"];
  d["format_version"] = "1";
  d["seed"] = std::to_string(ds.seed);
  d["delta"] = kv::format_double(ds.delta);
  d["schedule"] = kv::join_ints(ds.schedule);
  d["n_batches"] = std::to_string(ds.batches.size());
  d["initial_condition_policy"] = "fresh_per_batch";
  std::string seeds;
  for (std::size_t i = 0; i < ds.batches.size(); ++i) {
    if (i) seeds += ",";
    seeds += std::to_string(ds.batches[i].seed);
  }
  d["batch_seeds"] = seeds;
  write_stats(doc, "normalization", ds.stats);
  atomic_write(dir / "meta", kv::to_string(doc));
}

namespace {

struct MetaInfo {
  std::uint64_t seed = 0;
  double delta = 0.0;
  std::vector<int> schedule;
  excitation::NormalizationStats stats;
};

MetaInfo read_meta(const fs::path& dir) {
  const auto meta = dir / "meta";
  if (!fs::exists(meta)) throw ConfigError("dataset meta not found: " + meta.string());
  const auto doc = kv::read_file(meta);
  kv::SectionReader d(doc, "dataset");
  MetaInfo info;
  if (d.get_int("format_version") != 1) throw ConfigError("unsupported dataset format_version");
  info.seed = static_cast<std::uint64_t>(std::stoull(d.get_string("seed")));
  info.delta = d.get_double("delta");
  info.schedule = d.get_int_list("schedule");
  if (d.get_int("n_batches") != static_cast<long long>(info.schedule.size())) {
    throw ConfigError("dataset meta: n_batches disagrees with schedule");
  }
  d.get_string("initial_condition_policy");
  d.get_string("batch_seeds");
  d.finish();
  kv::SectionReader n(doc, "normalization");
  info.stats = read_stats(n);
  n.finish();
  return info;
}

}  // namespace

excitation::Dataset load_dataset(const fs::path& dir) {
  const auto info = read_meta(dir);
  excitation::Dataset ds;
  ds.seed = info.seed;
  ds.delta = info.delta;
  ds.schedule = info.schedule;
  ds.stats = info.stats;
  for (std::size_t i = 0; i < info.schedule.size(); ++i) {
    auto t = read_trajectory_csv(dir / ("batch_" + std::to_string(i) + ".csv"));
    if (t.steps() != info.schedule[i]) {
      throw ConfigError("dataset batch " + std::to_string(i) + " length disagrees with schedule");
    }
    ds.batches.push_back(std::move(t));
  }
  return ds;
}

excitation::NormalizationStats load_dataset_stats(const fs::path& dir) { return read_meta(dir).stats; }

std::string directory_hash(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::uint64_t h = kv::fnv1a("");
  for (const auto& f : files) {
    h = kv::fnv1a(fs::relative(f, dir).generic_string(), h);
    std::ifstream in(f, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    h = kv::fnv1a(s.str(), h);
  }
  return kv::hex64(h);
}

void atomic_write(const fs::path& file, const std::string& content) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  fs::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, file);
}

}  // namespace auvid::io
