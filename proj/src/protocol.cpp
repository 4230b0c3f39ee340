// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "fheadapt/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "wire.hpp"

namespace fheadapt::protocol {

using deferred::ParamId;
using deferred::ParamKind;

std::size_t padded_size(std::size_t real, const PaddingPolicy& policy) {
  std::size_t n = std::max(real, policy.min_batch);
  if (policy.power_of_two) n = std::bit_ceil(n);
  return n;
}

namespace {

sim::Ciphertext rerandomize(sim::Evaluator& ev, const sim::Ciphertext& ct) {
  return ev.add(ct, ev.encrypt(0.0));
}

deferred::ResidualFunction rerandomize(sim::Evaluator& ev,
                                       const deferred::ResidualFunction& f) {
  deferred::ResidualFunction out;
  for (std::size_t t = 0; t < f.size(); ++t) {
    out.add_term(f.monomial(t), rerandomize(ev, f.coefficient(t)));
  }
  return out;
}

double random_operand(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
}

void write_head(wire::Writer& w, wire::MessageKind kind, std::size_t records) {
  w.begin(wire::kHead);
  w.u32(static_cast<std::uint32_t>(kind));
  w.u32(static_cast<std::uint32_t>(records));
  w.end();
}

std::uint32_t read_head(wire::Reader& r, wire::MessageKind kind) {
  r.expect(wire::kHead);
  const std::size_t at = r.offset();
  const auto got = static_cast<wire::MessageKind>(r.u32());
  if (got != kind) {
    throw ParseError("unexpected message kind " + std::to_string(static_cast<int>(got)), at);
  }
  const std::uint32_t records = r.u32();
  r.close();
  return records;
}

}  // namespace

std::vector<ComparisonRequest> pad_with_decoys(std::vector<ComparisonRequest> batch,
                                               const PaddingPolicy& policy,
                                               sim::Evaluator& ev, std::mt19937_64& rng) {
  const std::size_t target = padded_size(batch.size(), policy);
  std::vector<sim::Ciphertext> pool;
  for (const auto& r : batch) {
    pool.push_back(r.lhs);
    pool.push_back(r.rhs);
  }
  while (batch.size() < target) {
    ComparisonRequest d;
    d.decoy = true;
    if (pool.empty()) {
      d.lhs = ev.encrypt(random_operand(rng));
      d.rhs = ev.encrypt(random_operand(rng));
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      d.lhs = rerandomize(ev, pool[pick(rng)]);
      d.rhs = rerandomize(ev, pool[pick(rng)]);
    }
    batch.push_back(d);
  }
  std::shuffle(batch.begin(), batch.end(), rng);
  return batch;
}

std::size_t RoundTrace::real_requests() const {
  std::size_t n = 0;
  for (const auto& r : rounds) n += r.real;
  return n;
}

std::size_t RoundTrace::decoy_requests() const {
  std::size_t n = 0;
  for (const auto& r : rounds) n += r.decoys;
  return n;
}

std::size_t RoundTrace::sqrt_requests() const {
  std::size_t n = 0;
  for (const auto& r : rounds) n += r.sqrts;
  return n;
}

std::size_t RoundTrace::bytes() const {
  std::size_t n = input_bytes + output_bytes;
  for (const auto& r : rounds) n += r.bytes_to_client + r.bytes_to_server;
  return n;
}

// ---------------------------------------------------------------------------
// Package format

namespace {

void write_records(wire::Writer& w, const deferred::DeferredPackage& pkg) {
  for (const auto& c : pkg.comparisons) {
    w.begin(wire::kComparison);
    w.u64(c.id);
    w.residual(c.lhs);
    w.residual(c.rhs);
    w.end();
  }
  for (const auto& s : pkg.sqrts) {
    w.begin(wire::kSqrt);
    w.u64(s.id);
    w.residual(s.arg);
    w.end();
  }
  for (const auto& v : pkg.values) {
    w.begin(wire::kValue);
    w.u64(v.id);
    w.residual(v.body);
    w.end();
  }
  for (const auto& slot : pkg.slots) {
    w.begin(wire::kSlot);
    w.str(slot.group);
    w.u32(static_cast<std::uint32_t>(slot.outputs.size()));
    for (const auto& f : slot.outputs) w.residual(f);
    w.end();
  }
}

std::size_t record_count(const deferred::DeferredPackage& pkg) {
  return pkg.comparisons.size() + pkg.sqrts.size() + pkg.values.size() + pkg.slots.size();
}

std::string dump_residual(const deferred::ResidualFunction& f, const sim::Decryptor& dec) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t t = 0; t < f.size(); ++t) {
    if (t) out << "; ";
    out << "{";
    const auto mono = f.monomial(t);
    for (std::size_t i = 0; i < mono.size(); ++i) {
      if (i) out << ",";
      out << deferred::to_string(mono[i]);
    }
    out << "}: " << dec.decrypt(f.coefficient(t));
  }
  return out.str();
}

}  // namespace

std::vector<std::uint8_t> serialize_package(const deferred::DeferredPackage& pkg) {
  wire::Writer w;
  write_head(w, wire::MessageKind::Package, record_count(pkg));
  write_records(w, pkg);
  return w.take();
}

deferred::DeferredPackage parse_package(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes);
  const std::uint32_t records = read_head(r, wire::MessageKind::Package);
  deferred::DeferredPackage pkg;
  for (std::uint32_t i = 0; i < records; ++i) {
    const std::size_t at = r.offset();
    const std::uint32_t tag = r.next();
    if (tag == wire::kComparison) {
      deferred::ComparisonRecord c;
      c.id = r.u64();
      c.lhs = r.residual();
      c.rhs = r.residual();
      pkg.comparisons.push_back(std::move(c));
    } else if (tag == wire::kSqrt) {
      deferred::SqrtRecord s;
      s.id = r.u64();
      s.arg = r.residual();
      pkg.sqrts.push_back(std::move(s));
    } else if (tag == wire::kValue) {
      deferred::ValueRecord v;
      v.id = r.u64();
      v.body = r.residual();
      pkg.values.push_back(std::move(v));
    } else if (tag == wire::kSlot) {
      deferred::Slot slot;
      slot.group = r.str();
      const std::uint32_t n = r.u32();
      for (std::uint32_t k = 0; k < n; ++k) slot.outputs.push_back(r.residual());
      pkg.slots.push_back(std::move(slot));
    } else {
      throw ParseError("unknown package record " + wire::tag_name(tag), at);
    }
    r.close();
  }
  if (!r.at_end()) throw ParseError("trailing bytes after package", r.offset());
  return pkg;
}

std::string dump_package(const deferred::DeferredPackage& pkg) {
  const sim::Decryptor dec;
  std::ostringstream out;
  for (const auto& c : pkg.comparisons) {
    out << "compare c" << c.id << ": [" << dump_residual(c.lhs, dec) << "] > ["
        << dump_residual(c.rhs, dec) << "]\n";
  }
  for (const auto& s : pkg.sqrts) {
    out << "sqrt s" << s.id << ": [" << dump_residual(s.arg, dec) << "]\n";
  }
  for (const auto& v : pkg.values) {
    out << "value v" << v.id << ": [" << dump_residual(v.body, dec) << "]\n";
  }
  for (const auto& slot : pkg.slots) {
    for (std::size_t i = 0; i < slot.outputs.size(); ++i) {
      out << "slot " << slot.group << "[" << i << "]: [" << dump_residual(slot.outputs[i], dec)
          << "]\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Client

Client::Client(sim::SimParams params, std::uint64_t seed) : ev_(params, seed) {}

std::vector<std::uint8_t> Client::encrypt_inputs(std::span<const double> xs) {
  sim::PartyScope scope(sim::Party::Client);
  wire::Writer w;
  write_head(w, wire::MessageKind::Input, 1);
  w.begin(wire::kInput);
  w.u32(static_cast<std::uint32_t>(xs.size()));
  for (double x : xs) w.cipher(ev_.encrypt(x));
  w.end();
  return w.take();
}

std::vector<std::uint8_t> Client::answer_round(std::span<const std::uint8_t> request) {
  sim::PartyScope scope(sim::Party::Client);
  wire::Reader r(request);
  const std::uint32_t records = read_head(r, wire::MessageKind::RoundRequest);
  wire::Writer w;
  write_head(w, wire::MessageKind::RoundResponse, records);
  for (std::uint32_t i = 0; i < records; ++i) {
    const std::size_t at = r.offset();
    const std::uint32_t tag = r.next();
    const std::uint32_t pos = r.u32();
    if (tag == wire::kComparison) {
      const double lhs = dec_.decrypt(r.cipher());
      const double rhs = dec_.decrypt(r.cipher());
      ++comparisons_answered_;
      w.begin(wire::kBoolResult);
      w.u32(pos);
      w.cipher(ev_.encrypt(lhs > rhs ? 1.0 : 0.0));
      w.end();
    } else if (tag == wire::kSqrt) {
      const double arg = dec_.decrypt(r.cipher());
      w.begin(wire::kSqrtResult);
      w.u32(pos);
      w.cipher(ev_.encrypt(std::sqrt(std::max(0.0, arg))));
      w.end();
    } else {
      throw ParseError("unknown request record " + wire::tag_name(tag), at);
    }
    r.close();
  }
  if (!r.at_end()) throw ParseError("trailing bytes after request", r.offset());
  return w.take();
}

std::map<std::string, std::vector<double>> Client::open_outputs(
    std::span<const std::uint8_t> message) {
  sim::PartyScope scope(sim::Party::Client);
  wire::Reader r(message);
  const std::uint32_t records = read_head(r, wire::MessageKind::Outputs);
  std::map<std::string, std::vector<double>> out;
  for (std::uint32_t i = 0; i < records; ++i) {
    r.expect(wire::kOutput);
    auto& group = out[r.str()];
    const std::uint32_t n = r.u32();
    for (std::uint32_t k = 0; k < n; ++k) group.push_back(dec_.decrypt(r.cipher()));
    r.close();
  }
  return out;
}

std::map<std::string, std::vector<double>> Client::resolve_package(
    std::span<const std::uint8_t> message) {
  sim::PartyScope scope(sim::Party::Client);
  const deferred::DeferredPackage pkg = parse_package(message);
  deferred::PackageResolver resolver(pkg, dec_);
  resolver.resolve_all();
  comparisons_answered_ += pkg.comparisons.size();
  std::map<std::string, std::vector<double>> out;
  for (const auto& slot : pkg.slots) {
    auto& group = out[slot.group];
    for (const auto& f : slot.outputs) group.push_back(resolver.evaluate(f));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sessions

Session::Session(const ProtocolOptions& opts, Client& client)
    : opts_(opts),
      client_(client),
      ev_(opts.sim, opts.seed),
      rng_(opts.seed ^ 0x5eed5eed5eed5eedULL) {}

void Session::begin_stage(const std::string& name) {
  if (!stages_.empty()) {
    finish_stage();
    current().ops = ev_.counts() - stage_start_ops_;
    current().min_level = ev_.min_level();
  }
  graph_.clear();
  stage_name_ = name;
  stages_.push_back(StageStats{});
  current().name = name;
  stage_start_ops_ = ev_.counts();
  ev_.reset_min_level();
}

void Session::output(const std::string& group, std::span<const Expr> targets) {
  const OutputGroup g{group, std::vector<Expr>(targets.begin(), targets.end())};
  output(std::span<const OutputGroup>(&g, 1));
}

namespace {

std::vector<Expr> all_targets(std::span<const OutputGroup> groups) {
  std::vector<Expr> all;
  for (const auto& g : groups) all.insert(all.end(), g.targets.begin(), g.targets.end());
  return all;
}

}  // namespace

void Session::finish() {
  if (stages_.empty()) return;
  finish_stage();
  current().ops = ev_.counts() - stage_start_ops_;
  current().min_level = ev_.min_level();
}

namespace {

class InteractiveSession final : public Session {
 public:
  InteractiveSession(const ProtocolOptions& opts, Client& client) : Session(opts, client) {}

  bool deferred_mode() const override { return false; }

  std::vector<Value> materialize(std::span<const Expr> targets) override {
    resolve_requests(targets);
    std::vector<Value> out;
    out.reserve(targets.size());
    for (const Expr& t : targets) {
      out.push_back(Value::cipher(graph_.ids().next_leaf(), evaluator().eval_cipher(t)));
    }
    return out;
  }

  using Session::output;

  void output(std::span<const OutputGroup> groups) override {
    const std::vector<Expr> all = all_targets(groups);
    resolve_requests(all);
    wire::Writer w;
    write_head(w, wire::MessageKind::Outputs, groups.size());
    for (const auto& g : groups) {
      w.begin(wire::kOutput);
      w.str(g.name);
      w.u32(static_cast<std::uint32_t>(g.targets.size()));
      for (const Expr& t : g.targets) w.cipher(evaluator().eval_cipher(t));
      w.end();
    }
    const auto bytes = w.take();
    trace_.output_bytes += bytes.size();
    current().bytes += bytes.size();
    for (auto& [name, values] : client_.open_outputs(bytes)) {
      auto& dst = outputs_[name];
      dst.insert(dst.end(), values.begin(), values.end());
    }
  }

  void reset_graph() override {
    cipher_eval_.reset();
    graph_.clear();
  }

  std::vector<sim::Ciphertext> require_ciphers(std::span<const Expr> targets) override {
    resolve_requests(targets);
    std::vector<sim::Ciphertext> out;
    out.reserve(targets.size());
    for (const Expr& t : targets) out.push_back(evaluator().eval_cipher(t));
    return out;
  }

 protected:
  void finish_stage() override { cipher_eval_.reset(); }

 private:
  deferred::CipherEvaluator& evaluator() {
    if (!cipher_eval_) cipher_eval_ = std::make_unique<deferred::CipherEvaluator>(graph_, ev_);
    return *cipher_eval_;
  }

  void resolve_requests(std::span<const Expr> targets) {
    if (stages_.empty()) begin_stage("main");
    current().dependency_depth += deferred::dependency_depth(graph_, targets);
    auto& ce = evaluator();

    // Request depth of every unresolved comparison / sqrt the targets need.
    std::vector<std::uint32_t> order;
    std::unordered_map<std::uint32_t, std::uint32_t> depth;
    std::vector<std::uint32_t> stack;
    auto discover = [&](std::uint32_t id) {
      if (depth.emplace(id, 0).second) {
        stack.push_back(id);
        order.push_back(id);
      }
    };
    auto pending = [&](const deferred::Node& n, std::uint32_t id) {
      return (n.kind == deferred::NodeKind::BoolVar || n.kind == deferred::NodeKind::Sqrt) &&
             !ce.resolved(graph_.param_of(id));
    };
    for (const Expr& t : targets) discover(t.id());
    while (!stack.empty()) {
      const std::uint32_t id = stack.back();
      stack.pop_back();
      const deferred::Node& n = graph_.node(id);
      if (n.kind == deferred::NodeKind::Add || n.kind == deferred::NodeKind::Mul ||
          (n.kind == deferred::NodeKind::BoolVar && pending(n, id))) {
        discover(n.lhs);
        discover(n.rhs);
      } else if (n.kind == deferred::NodeKind::Sqrt && pending(n, id)) {
        discover(n.lhs);
      }
    }
    std::sort(order.begin(), order.end());
    std::vector<std::vector<std::uint32_t>> by_depth;
    for (std::uint32_t id : order) {
      const deferred::Node& n = graph_.node(id);
      std::uint32_t d = 0;
      switch (n.kind) {
        case deferred::NodeKind::Add:
        case deferred::NodeKind::Mul:
          d = std::max(depth.at(n.lhs), depth.at(n.rhs));
          break;
        case deferred::NodeKind::BoolVar:
          if (pending(n, id)) d = 1 + std::max(depth.at(n.lhs), depth.at(n.rhs));
          break;
        case deferred::NodeKind::Sqrt:
          if (pending(n, id)) d = 1 + depth.at(n.lhs);
          break;
        default:
          break;
      }
      depth[id] = d;
      if (pending(n, id)) {
        if (by_depth.size() < d) by_depth.resize(d);
        by_depth[d - 1].push_back(id);
      }
    }
    for (const auto& level : by_depth) round(level);
  }

  void round(const std::vector<std::uint32_t>& nodes) {
    auto& ce = evaluator();
    std::vector<ComparisonRequest> batch;
    std::vector<std::pair<std::uint64_t, sim::Ciphertext>> sqrts;
    for (std::uint32_t id : nodes) {
      const deferred::Node& n = graph_.node(id);
      if (n.kind == deferred::NodeKind::BoolVar) {
        batch.push_back(ComparisonRequest{n.key, ce.eval_cipher(graph_.expr(n.lhs)),
                                          ce.eval_cipher(graph_.expr(n.rhs)), false});
      } else {
        sqrts.emplace_back(n.key, ce.eval_cipher(graph_.expr(n.lhs)));
      }
    }
    const std::size_t real = batch.size();
    const auto padded = pad_with_decoys(std::move(batch), opts_.padding, ev_, rng_);

    wire::Writer w;
    write_head(w, wire::MessageKind::RoundRequest, padded.size() + sqrts.size());
    for (std::size_t pos = 0; pos < padded.size(); ++pos) {
      w.begin(wire::kComparison);
      w.u32(static_cast<std::uint32_t>(pos));
      w.cipher(padded[pos].lhs);
      w.cipher(padded[pos].rhs);
      w.end();
    }
    for (std::size_t k = 0; k < sqrts.size(); ++k) {
      w.begin(wire::kSqrt);
      w.u32(static_cast<std::uint32_t>(k));
      w.cipher(sqrts[k].second);
      w.end();
    }
    const auto request = w.take();
    const auto response = client_.answer_round(request);

    wire::Reader r(response);
    const std::uint32_t records = read_head(r, wire::MessageKind::RoundResponse);
    for (std::uint32_t i = 0; i < records; ++i) {
      const std::size_t at = r.offset();
      const std::uint32_t tag = r.next();
      const std::uint32_t pos = r.u32();
      const sim::Ciphertext ct = r.cipher();
      r.close();
      if (tag == wire::kBoolResult && pos < padded.size()) {
        if (!padded[pos].decoy) ce.resolve(ParamId::make(ParamKind::Bool, padded[pos].id), ct);
      } else if (tag == wire::kSqrtResult && pos < sqrts.size()) {
        ce.resolve(ParamId::make(ParamKind::Sqrt, sqrts[pos].first), ct);
      } else {
        throw ParseError("unexpected response record " + wire::tag_name(tag), at);
      }
    }

    RoundRecord rec{stage_name_, real, padded.size() - real, sqrts.size(), request.size(),
                    response.size()};
    trace_.rounds.push_back(rec);
    StageStats& s = current();
    ++s.rounds;
    s.real_requests += rec.real;
    s.decoy_requests += rec.decoys;
    s.sqrt_requests += rec.sqrts;
    s.batch_sizes.push_back(padded.size());
    s.bytes += request.size() + response.size();
  }

  std::unique_ptr<deferred::CipherEvaluator> cipher_eval_;
};

class DeferredSession final : public Session {
 public:
  DeferredSession(const ProtocolOptions& opts, Client& client)
      : Session(opts, client), lowerer_(ev_, pkg_, opts.lowering) {}

  bool deferred_mode() const override { return true; }

  std::vector<Value> materialize(std::span<const Expr> targets) override {
    ensure_stage();
    current().dependency_depth += deferred::dependency_depth(graph_, targets);
    return lowerer_.materialize(graph_, targets);
  }

  using Session::output;

  void output(std::span<const OutputGroup> groups) override {
    ensure_stage();
    const std::vector<Expr> all = all_targets(groups);
    current().dependency_depth += deferred::dependency_depth(graph_, all);
    auto residuals = lowerer_.lower(graph_, all);
    wire::Writer w;
    for (const auto& f : residuals) w.residual(f);
    current().bytes += w.take().size();
    std::size_t next = 0;
    for (const auto& g : groups) {
      auto it = std::find_if(pkg_.slots.begin(), pkg_.slots.end(),
                             [&g](const deferred::Slot& s) { return s.group == g.name; });
      if (it == pkg_.slots.end()) {
        pkg_.slots.push_back(deferred::Slot{g.name, {}});
        it = pkg_.slots.end() - 1;
      }
      for (std::size_t i = 0; i < g.targets.size(); ++i) {
        it->outputs.push_back(std::move(residuals[next++]));
      }
    }
  }

  void reset_graph() override {
    lowerer_.forget_graph();
    graph_.clear();
  }

  std::vector<sim::Ciphertext> require_ciphers(std::span<const Expr> targets) override {
    ensure_stage();
    const auto residuals = lowerer_.lower(graph_, targets);
    std::vector<sim::Ciphertext> out;
    out.reserve(residuals.size());
    for (const auto& f : residuals) {
      for (std::size_t t = 0; t < f.size(); ++t) {
        if (!f.monomial(t).empty()) {
          throw DeferralUnsupported("stage " + stage_name_ +
                                    " needs a comparison-dependent value as a ciphertext; "
                                    "run it in interactive mode");
        }
      }
      out.push_back(f.empty() ? ev_.encrypt(0.0) : f.coefficient(0));
    }
    return out;
  }

  const deferred::DeferredPackage& package() const { return pkg_; }
  void release_package() { pkg_ = {}; }

 protected:
  void finish_stage() override {
    const std::size_t real = pkg_.comparisons.size() - cmp_begin_;
    const std::size_t target = padded_size(real, opts_.padding);
    std::vector<const deferred::ResidualFunction*> pool;
    for (std::size_t i = cmp_begin_; i < pkg_.comparisons.size(); ++i) {
      pool.push_back(&pkg_.comparisons[i].lhs);
      pool.push_back(&pkg_.comparisons[i].rhs);
    }
    std::vector<deferred::ComparisonRecord> decoys;
    for (std::size_t k = real; k < target; ++k) {
      deferred::ComparisonRecord d;
      d.id = graph_.ids().next_comparison();
      if (pool.empty()) {
        d.lhs.add_term({}, ev_.encrypt(random_operand(rng_)));
        d.rhs.add_term({}, ev_.encrypt(random_operand(rng_)));
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        d.lhs = rerandomize(ev_, *pool[pick(rng_)]);
        d.rhs = rerandomize(ev_, *pool[pick(rng_)]);
      }
      decoys.push_back(std::move(d));
    }
    for (auto& d : decoys) pkg_.comparisons.push_back(std::move(d));
    std::shuffle(pkg_.comparisons.begin() + static_cast<std::ptrdiff_t>(cmp_begin_),
                 pkg_.comparisons.end(), rng_);

    deferred::DeferredPackage segment;
    segment.comparisons.assign(pkg_.comparisons.begin() + static_cast<std::ptrdiff_t>(cmp_begin_),
                               pkg_.comparisons.end());
    segment.sqrts.assign(pkg_.sqrts.begin() + static_cast<std::ptrdiff_t>(sqrt_begin_),
                         pkg_.sqrts.end());
    segment.values.assign(pkg_.values.begin() + static_cast<std::ptrdiff_t>(value_begin_),
                          pkg_.values.end());
    wire::Writer w;
    write_records(w, segment);

    StageStats& s = current();
    s.real_requests = real;
    s.decoy_requests = target - real;
    s.sqrt_requests = segment.sqrts.size();
    s.batch_sizes.push_back(target);
    s.bytes += w.take().size();
    s.leakage = segment.leakage();

    cmp_begin_ = pkg_.comparisons.size();
    sqrt_begin_ = pkg_.sqrts.size();
    value_begin_ = pkg_.values.size();
    lowerer_.forget_graph();
  }

 private:
  void ensure_stage() {
    if (stages_.empty()) begin_stage("main");
  }

  deferred::DeferredPackage pkg_;
  deferred::Lowerer lowerer_;
  std::size_t cmp_begin_ = 0;
  std::size_t sqrt_begin_ = 0;
  std::size_t value_begin_ = 0;
};

}  // namespace

struct Runner {
  static void start(Session& s, Client& client, std::span<const double> inputs) {
    const auto upload = client.encrypt_inputs(inputs);
    s.trace_.input_bytes = upload.size();
    wire::Reader r(upload);
    read_head(r, wire::MessageKind::Input);
    r.expect(wire::kInput);
    const std::uint32_t n = r.u32();
    s.inputs_.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      s.inputs_.push_back(Value::cipher(s.graph_.ids().next_leaf(), r.cipher()));
    }
    r.close();
  }

  static void execute(Session& s, const Program& program) {
    try {
      program(s);
      s.finish();
    } catch (const DepthExhausted& e) {
      if (!e.stage().empty()) throw;
      throw e.with_stage(s.stage_name_.empty() ? "main" : s.stage_name_);
    }
  }

  static RunResult collect(Session& s) {
    RunResult out;
    out.outputs = std::move(s.outputs_);
    out.trace = std::move(s.trace_);
    out.stages = std::move(s.stages_);
    for (const auto& st : out.stages) out.leakage += st.leakage;
    return out;
  }

  static RunResult interactive(const Program& program, Client& client,
                               std::span<const double> inputs, const ProtocolOptions& opts) {
    InteractiveSession s(opts, client);
    sim::PartyScope server(sim::Party::Server);
    start(s, client, inputs);
    execute(s, program);
    return collect(s);
  }

  static RunResult deferred(const Program& program, Client& client,
                            std::span<const double> inputs, const ProtocolOptions& opts) {
    DeferredSession s(opts, client);
    sim::PartyScope server(sim::Party::Server);
    start(s, client, inputs);
    execute(s, program);
    const auto message = serialize_package(s.package());
    s.release_package();
    RoundRecord rec;
    rec.stage = "package";
    for (const auto& st : s.stages_) {
      rec.real += st.real_requests;
      rec.decoys += st.decoy_requests;
      rec.sqrts += st.sqrt_requests;
    }
    rec.bytes_to_client = message.size();
    s.trace_.rounds.push_back(rec);
    s.outputs_ = client.resolve_package(message);
    return collect(s);
  }
};

RunResult run_interactive(const Program& program, Client& client,
                          std::span<const double> inputs, const ProtocolOptions& opts) {
  return Runner::interactive(program, client, inputs, opts);
}

RunResult run_deferred(const Program& program, Client& client,
                       std::span<const double> inputs, const ProtocolOptions& opts) {
  return Runner::deferred(program, client, inputs, opts);
}

}  // namespace fheadapt::protocol
