// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "fheadapt/report.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/lexical_cast.hpp>

#include "fheadapt/errors.hpp"

namespace fheadapt::report {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

class KvWriter {
 public:
  template <class T>
  void put(const std::string& key, const T& v) {
    if constexpr (std::is_floating_point_v<T>) {
      out_ << key << " = " << fmt(v) << "\n";
    } else {
      out_ << key << " = " << v << "\n";
    }
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

struct KvEntry {
  std::string value;
  std::size_t offset = 0;
};

class KvReader {
 public:
  explicit KvReader(const std::string& text) {
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      std::string line = text.substr(start, end - start);
      boost::algorithm::trim(line);
      if (!line.empty() && line[0] != '#') {
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", start);
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        boost::algorithm::trim(key);
        boost::algorithm::trim(value);
        if (!entries_.emplace(key, KvEntry{value, start}).second) {
          throw ParseError("duplicate key " + key, start);
        }
      }
      start = end + 1;
    }
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  template <class T>
  void get(const std::string& key, T& out) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ParseError("missing key " + key, 0);
    used_.insert(key);
    try {
      out = boost::lexical_cast<T>(it->second.value);
    } catch (const boost::bad_lexical_cast&) {
      throw ParseError("bad value for " + key, it->second.offset);
    }
  }

  void finish() const {
    for (const auto& [key, e] : entries_) {
      if (!used_.count(key)) throw ParseError("unknown key " + key, e.offset);
    }
  }

 private:
  std::map<std::string, KvEntry> entries_;
  std::set<std::string> used_;
};

template <class F>
void each_stage_field(StageReport& s, F&& f) {
  f("name", s.name);
  f("levels_consumed", s.levels_consumed);
  f("rounds", s.rounds);
  f("real_requests", s.real_requests);
  f("decoy_requests", s.decoy_requests);
  f("sqrt_requests", s.sqrt_requests);
  f("bytes", s.bytes);
  f("dependency_depth", s.dependency_depth);
  f("ops.encrypt", s.ops.encrypt);
  f("ops.add", s.ops.add);
  f("ops.mul", s.ops.mul);
  f("ops.mul_plain", s.ops.mul_plain);
}

template <class F>
void each_field(RunReport& r, F&& f) {
  f("mode", r.mode);
  f("seed", r.seed);
  f("width", r.width);
  f("height", r.height);
  f("depth_budget", r.depth_budget);
  f("rounds", r.rounds);
  f("real_requests", r.real_requests);
  f("decoy_requests", r.decoy_requests);
  f("sqrt_requests", r.sqrt_requests);
  f("bytes", r.bytes);
  f("input_bytes", r.input_bytes);
  f("output_bytes", r.output_bytes);
  f("candidates", r.candidates);
  f("keypoints", r.keypoints);
  f("ambiguous", r.ambiguous);
  f("server_decrypts", r.server_decrypts);
  f("leakage.monomials", r.leakage_monomials);
  f("leakage.parameters", r.leakage_parameters);
  f("check.max_onehot_error", r.max_onehot_error);
  f("check.max_conservation_error", r.max_conservation_error);
}

template <class F>
void each_diff_field(DiffSummary& d, F&& f) {
  f("matched", d.matched);
  f("missing", d.missing);
  f("spurious", d.spurious);
  f("excluded", d.excluded);
  f("orientation_agree", d.orientation_agree);
  f("descriptor_agree", d.descriptor_agree);
  f("max_descriptor_delta", d.max_descriptor_delta);
}

}  // namespace

RunReport make_report(const sift::PipelineResult& result, const RunConfig& cfg, int width,
                      int height) {
  RunReport r;
  r.mode = mode_name(cfg.mode);
  r.seed = cfg.seed;
  r.width = width;
  r.height = height;
  r.depth_budget = cfg.sim.depth_budget;
  for (std::size_t i = 0; i < result.stages.size(); ++i) {
    const protocol::StageStats& st = result.stages[i];
    StageReport s;
    s.name = st.name;
    s.levels_consumed = result.depth[i].levels_consumed;
    s.rounds = st.rounds;
    s.real_requests = st.real_requests;
    s.decoy_requests = st.decoy_requests;
    s.sqrt_requests = st.sqrt_requests;
    s.bytes = st.bytes;
    s.dependency_depth = st.dependency_depth;
    s.ops = st.ops;
    r.stages.push_back(std::move(s));
  }
  const protocol::RoundTrace& t = result.trace;
  r.rounds = t.rounds.size();
  r.real_requests = t.real_requests();
  r.decoy_requests = t.decoy_requests();
  r.sqrt_requests = t.sqrt_requests();
  r.bytes = t.bytes();
  r.input_bytes = t.input_bytes;
  r.output_bytes = t.output_bytes;
  r.candidates = result.candidates;
  r.keypoints = result.keypoints.keypoints.size();
  r.ambiguous = result.keypoints.ambiguous.size();
  r.server_decrypts = result.server_decrypts;
  r.leakage_monomials = result.leakage.monomials;
  r.leakage_parameters = result.leakage.parameters;
  r.max_onehot_error = result.checks.max_onehot_error;
  r.max_conservation_error = result.checks.max_conservation_error;
  return r;
}

std::string format_kv(const RunReport& report) {
  RunReport r = report;
  KvWriter w;
  each_field(r, [&](const char* key, auto& v) { w.put(key, v); });
  w.put("stages", r.stages.size());
  for (std::size_t i = 0; i < r.stages.size(); ++i) {
    const std::string prefix = "stage." + std::to_string(i) + ".";
    each_stage_field(r.stages[i], [&](const char* key, auto& v) { w.put(prefix + key, v); });
  }
  if (r.diff) {
    each_diff_field(*r.diff, [&](const char* key, auto& v) { w.put(std::string("diff.") + key, v); });
  }
  return w.str();
}

RunReport parse_kv(const std::string& text) {
  KvReader in(text);
  RunReport r;
  each_field(r, [&](const char* key, auto& v) { in.get(key, v); });
  std::size_t stages = 0;
  in.get("stages", stages);
  r.stages.resize(stages);
  for (std::size_t i = 0; i < stages; ++i) {
    const std::string prefix = "stage." + std::to_string(i) + ".";
    each_stage_field(r.stages[i], [&](const char* key, auto& v) { in.get(prefix + key, v); });
  }
  if (in.has("diff.matched")) {
    r.diff.emplace();
    each_diff_field(*r.diff, [&](const char* key, auto& v) { in.get(std::string("diff.") + key, v); });
  }
  in.finish();
  return r;
}

std::string format_text(const RunReport& r) {
  std::ostringstream out;
  out << "fheadapt run report\n"
      << "  mode            " << r.mode << " (seed " << r.seed << ")\n"
      << "  image           " << r.width << "x" << r.height << "\n"
      << "  depth budget    " << r.depth_budget << "\n"
      << "  candidates      " << r.candidates << "\n"
      << "  keypoints       " << r.keypoints << " (" << r.ambiguous << " ambiguous)\n"
      << "  rounds          " << r.rounds << "\n"
      << "  requests        " << r.real_requests << " real, " << r.decoy_requests << " decoy, "
      << r.sqrt_requests << " sqrt\n"
      << "  bytes           " << r.bytes << " (inputs " << r.input_bytes << ", outputs "
      << r.output_bytes << ")\n"
      << "  server decrypts " << r.server_decrypts << "\n"
      << "  leakage         " << r.leakage_monomials << " monomials, " << r.leakage_parameters
      << " parameters\n"
      << "  one-hot error   " << fmt(r.max_onehot_error) << "\n"
      << "  conservation    " << fmt(r.max_conservation_error) << "\n";
  if (!r.stages.empty()) {
    char line[160];
    std::snprintf(line, sizeof line, "\n  %-12s %6s %6s %6s %8s %8s %6s %10s\n", "stage", "levels",
                  "depth", "rounds", "real", "decoy", "sqrt", "bytes");
    out << line;
    for (const StageReport& s : r.stages) {
      std::snprintf(line, sizeof line, "  %-12s %6d %6zu %6zu %8zu %8zu %6zu %10zu\n",
                    s.name.c_str(), s.levels_consumed, s.dependency_depth, s.rounds,
                    s.real_requests, s.decoy_requests, s.sqrt_requests, s.bytes);
      out << line;
    }
  }
  if (r.diff) {
    const DiffSummary& d = *r.diff;
    out << "\n  oracle diff     " << d.matched << " matched, " << d.missing << " missing, "
        << d.spurious << " spurious, " << d.excluded << " excluded\n"
        << "  orientation     " << fmt(d.orientation_agreement()) << " agreement\n"
        << "  descriptor      max delta " << fmt(d.max_descriptor_delta) << "\n";
  }
  return out.str();
}

std::string format_trace(const protocol::RoundTrace& trace) {
  std::ostringstream out;
  out << "# round stage real decoys sqrts bytes_to_client bytes_to_server\n"
      << "input_bytes " << trace.input_bytes << "\n"
      << "output_bytes " << trace.output_bytes << "\n";
  for (std::size_t i = 0; i < trace.rounds.size(); ++i) {
    const protocol::RoundRecord& rec = trace.rounds[i];
    out << "round " << i << " " << rec.stage << " " << rec.real << " " << rec.decoys << " "
        << rec.sqrts << " " << rec.bytes_to_client << " " << rec.bytes_to_server << "\n";
  }
  return out.str();
}

protocol::RoundTrace parse_trace(const std::string& text) {
  protocol::RoundTrace trace;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    std::istringstream in(line);
    std::string word;
    if (!line.empty() && line[0] != '#' && in >> word) {
      bool ok = true;
      if (word == "input_bytes") {
        ok = static_cast<bool>(in >> trace.input_bytes);
      } else if (word == "output_bytes") {
        ok = static_cast<bool>(in >> trace.output_bytes);
      } else if (word == "round") {
        std::size_t index = 0;
        protocol::RoundRecord rec;
        ok = static_cast<bool>(in >> index >> rec.stage >> rec.real >> rec.decoys >> rec.sqrts >>
                               rec.bytes_to_client >> rec.bytes_to_server) &&
             index == trace.rounds.size();
        trace.rounds.push_back(std::move(rec));
      } else {
        ok = false;
      }
      if (!ok) throw ParseError("malformed trace line", start);
    }
    start = end + 1;
  }
  return trace;
}

}  // namespace fheadapt::report
