// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "fheadapt/sift.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "fheadapt/errors.hpp"
#include "fheadapt/oracle.hpp"

namespace fheadapt::sift {

using deferred::compare;
using deferred::DenSign;
using deferred::Graph;
using deferred::Value;
using kernels::Grid;
using protocol::OutputGroup;
using protocol::Session;

Layout Layout::make(int width, int height, const PipelineConfig& cfg) {
  cfg.validate();
  if (width < 16 || height < 16) {
    throw InvalidArgument("image must be at least 16x16, got " + std::to_string(width) + "x" +
                          std::to_string(height));
  }
  const int need = std::max(cfg.orientation_radius + 1, cfg.descriptor_cells * kCellSize / 2 + 1);
  if (cfg.border < need) {
    throw InvalidArgument("border must be at least " + std::to_string(need) +
                          " for the configured windows");
  }
  Layout l;
  l.width = width;
  l.height = height;
  int w = width;
  int h = height;
  for (int o = 0; o < cfg.octaves; ++o) {
    l.octaves.push_back({w, h});
    w = (w + 1) / 2;
    h = (h + 1) / 2;
  }
  for (int o = 0; o < cfg.octaves; ++o) {
    const OctaveShape& s = l.octaves[static_cast<std::size_t>(o)];
    for (int k = 1; k <= cfg.scales_per_octave; ++k) {
      for (int y = cfg.border; y < s.height - cfg.border; ++y) {
        for (int x = cfg.border; x < s.width - cfg.border; ++x) l.candidates.push_back({o, k, x, y});
      }
    }
  }
  return l;
}

double scale_sigma(const PipelineConfig& cfg, int level) {
  return cfg.base_sigma * std::exp2(static_cast<double>(level) / cfg.scales_per_octave);
}

double level_sigma(const PipelineConfig& cfg, int octave, int level) {
  if (octave == 0) return scale_sigma(cfg, level);
  if (level == 0) return 0.0;
  return cfg.base_sigma *
         std::sqrt(std::exp2(2.0 * level / cfg.scales_per_octave) - 1.0);
}

std::vector<double> orientation_weights(const PipelineConfig& cfg, int level) {
  const double s = 1.5 * scale_sigma(cfg, level);
  const int r = cfg.orientation_radius;
  std::vector<double> w;
  for (int i = -r; i <= r; ++i) w.push_back(std::exp(-static_cast<double>(i * i) / (2.0 * s * s)));
  return w;
}

Expr extremum_mask(const Neighborhood& n, const PipelineConfig& cfg) {
  const Expr v = n(0, 0, 0);
  Graph& g = *v.graph();
  const Expr zero = g.plain(0.0);
  std::vector<Expr> above;
  std::vector<Expr> below;
  for (int ds = -1; ds <= 1; ++ds) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (ds == 0 && dy == 0 && dx == 0) continue;
        const Expr nb = n(ds, dx, dy);
        above.push_back(compare(v - nb, zero));
        below.push_back(compare(nb - v, zero));
      }
    }
  }
  const Expr t = g.plain(cfg.contrast_threshold);
  const Expr contrast = compare(v, t) + compare(-v, t);
  return (deferred::product(g, above) + deferred::product(g, below)) * contrast;
}

Localization localize(const Neighborhood& n, const PipelineConfig& cfg) {
  const Expr c = n(0, 0, 0);
  Graph& g = *c.graph();
  // Axes: 0 = x, 1 = y, 2 = scale.
  auto at = [&](int axis, int step) {
    return axis == 0 ? n(0, step, 0) : axis == 1 ? n(0, 0, step) : n(step, 0, 0);
  };
  auto at2 = [&](int a, int sa, int b, int sb) {
    int d[3] = {0, 0, 0};
    d[a] = sa;
    d[b] = sb;
    return n(d[2], d[0], d[1]);
  };
  // Gradient and Hessian scaled by 2 and 4 so no entry needs a fraction.
  std::array<Expr, 3> grad;
  for (int a = 0; a < 3; ++a) grad[static_cast<std::size_t>(a)] = -2.0 * (at(a, 1) - at(a, -1));
  Expr h[3][3];
  for (int a = 0; a < 3; ++a) h[a][a] = 4.0 * (at(a, 1) + at(a, -1)) - 8.0 * c;
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      h[a][b] = h[b][a] = (at2(a, 1, b, 1) - at2(a, 1, b, -1)) - (at2(a, -1, b, 1) - at2(a, -1, b, -1));
    }
  }
  Expr adj[3][3];
  adj[0][0] = h[1][1] * h[2][2] - h[1][2] * h[1][2];
  adj[1][1] = h[0][0] * h[2][2] - h[0][2] * h[0][2];
  adj[2][2] = h[0][0] * h[1][1] - h[0][1] * h[0][1];
  adj[0][1] = adj[1][0] = h[0][2] * h[1][2] - h[0][1] * h[2][2];
  adj[0][2] = adj[2][0] = h[0][1] * h[1][2] - h[0][2] * h[1][1];
  adj[1][2] = adj[2][1] = h[0][1] * h[0][2] - h[0][0] * h[1][2];
  const Expr det = h[0][0] * adj[0][0] + h[0][1] * adj[0][1] + h[0][2] * adj[0][2];

  Localization out;
  const Rational half = deferred::as_rational(g.plain(0.5));
  const Rational neg_half = deferred::as_rational(g.plain(-0.5));
  std::vector<Expr> ok;
  for (int a = 0; a < 3; ++a) {
    const Expr num = adj[a][0] * grad[0] + adj[a][1] * grad[1] + adj[a][2] * grad[2];
    const Rational r = deferred::rational_div(num, det, DenSign::Unknown);
    out.offset[static_cast<std::size_t>(a)] = r;
    ok.push_back(deferred::rational_less_equal(r, half));
    ok.push_back(deferred::rational_less_equal(neg_half, r));
  }
  out.offsets_ok = deferred::product(g, ok);
  const Expr tr = h[0][0] + h[1][1];
  const Expr det2 = h[0][0] * h[1][1] - h[0][1] * h[0][1];
  out.edge_ok = 1.0 - compare(tr * tr, cfg.edge_threshold * det2);
  out.keep = out.offsets_ok * out.edge_ok;
  return out;
}

kernels::Gradient central_gradient(const Grid<Expr>& level, int x, int y) {
  kernels::Gradient g;
  g.dx = level.at(x + 1, y) - level.at(x - 1, y);
  g.dy = level.at(x, y + 1) - level.at(x, y - 1);
  g.weight = g.dx * g.dx + g.dy * g.dy;
  return g;
}

// ---------------------------------------------------------------------------
// Server program

namespace {

// Rectangle [x0, x1) x [y0, y1) in octave coordinates.
struct Box {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  Box grow(int left, int right, int top, int bottom) const {
    return {x0 - left, y0 - top, x1 + right, y1 + bottom};
  }
};

// Dense storage over a box, addressed in octave coordinates.
template <class T>
struct Patch {
  Box box;
  std::vector<T> data;

  explicit Patch(Box b = {}) : box(b), data(std::size_t(b.width()) * std::size_t(b.height())) {}
  T& at(int x, int y) { return data[std::size_t(y - box.y0) * box.width() + (x - box.x0)]; }
  const T& at(int x, int y) const {
    return data[std::size_t(y - box.y0) * box.width() + (x - box.x0)];
  }
};

// Candidates sharing an octave and scale.
struct Group {
  int octave = 0;
  int scale = 0;
  std::size_t first = 0;  // index range into Layout::candidates
  std::size_t last = 0;
  Box box;
};

std::vector<Group> groups_of(const Layout& l) {
  std::vector<Group> out;
  for (std::size_t i = 0; i < l.candidates.size(); ++i) {
    const Candidate& c = l.candidates[i];
    if (out.empty() || out.back().octave != c.octave || out.back().scale != c.scale) {
      out.push_back(Group{c.octave, c.scale, i, i, {c.x, c.y, c.x + 1, c.y + 1}});
    }
    Group& g = out.back();
    g.last = i + 1;
    g.box.x0 = std::min(g.box.x0, c.x);
    g.box.y0 = std::min(g.box.y0, c.y);
    g.box.x1 = std::max(g.box.x1, c.x + 1);
    g.box.y1 = std::max(g.box.y1, c.y + 1);
  }
  return out;
}

class Server {
 public:
  Server(Session& s, const Layout& layout, const PipelineConfig& cfg)
      : s_(s), layout_(layout), cfg_(cfg), groups_(groups_of(layout)) {}

  void run() {
    scale_space();
    extrema();
    localization();
    orientation();
    descriptor();
  }

 private:
  int levels() const { return cfg_.scales_per_octave + 3; }

  Grid<Expr> leaves(const Grid<Value>& v) {
    Grid<Expr> out(v.width, v.height);
    for (std::size_t i = 0; i < v.data.size(); ++i) out.data[i] = s_.leaf(v.data[i]);
    return out;
  }

  Grid<Value> materialize(const Grid<Expr>& e) {
    Grid<Value> out(e.width, e.height);
    out.data = s_.materialize(e.data);
    return out;
  }

  // Leaves of a Gaussian level, created on first use within the graph.
  const Grid<Expr>& gauss(int o, int k) {
    auto& slot = gauss_leaves_[static_cast<std::size_t>(o)][static_cast<std::size_t>(k)];
    if (slot.data.empty()) slot = leaves(gauss_[static_cast<std::size_t>(o)][static_cast<std::size_t>(k)]);
    return slot;
  }

  // DoG level k = G[k + 1] - G[k], built on first use within the graph.
  const Grid<Expr>& dog(int o, int k) {
    auto& slot = dog_[static_cast<std::size_t>(o)][static_cast<std::size_t>(k)];
    if (slot.data.empty()) {
      const Grid<Expr>& hi = gauss(o, k + 1);
      const Grid<Expr>& lo = gauss(o, k);
      slot = Grid<Expr>(hi.width, hi.height);
      for (std::size_t i = 0; i < hi.data.size(); ++i) slot.data[i] = hi.data[i] - lo.data[i];
    }
    return slot;
  }

  void reset_graph() {
    s_.reset_graph();
    const std::size_t octaves = layout_.octaves.size();
    const std::size_t nlevels = static_cast<std::size_t>(levels());
    gauss_leaves_.assign(octaves, std::vector<Grid<Expr>>(nlevels));
    dog_.assign(octaves, std::vector<Grid<Expr>>(nlevels));
  }

  Neighborhood neighborhood(const Candidate& c) {
    return [this, c](int ds, int dx, int dy) {
      return dog(c.octave, c.scale + ds).at(c.x + dx, c.y + dy);
    };
  }

  void scale_space() {
    s_.begin_stage("scale_space");
    if (s_.inputs().size() != std::size_t(layout_.width) * layout_.height) {
      throw InvalidArgument("session inputs do not match the image size");
    }
    Grid<Value> input(layout_.width, layout_.height);
    input.data = s_.inputs();
    gauss_.assign(layout_.octaves.size(), {});
    for (std::size_t o = 0; o < layout_.octaves.size(); ++o) {
      auto& levels_o = gauss_[o];
      for (int k = 0; k < levels(); ++k) {
        if (o > 0 && k == 0) {
          const Grid<Value>& parent = gauss_[o - 1][static_cast<std::size_t>(cfg_.scales_per_octave)];
          const OctaveShape shape = layout_.octaves[o];
          Grid<Value> base(shape.width, shape.height);
          for (int y = 0; y < shape.height; ++y) {
            for (int x = 0; x < shape.width; ++x) base.at(x, y) = parent.at(2 * x, 2 * y);
          }
          levels_o.push_back(std::move(base));
          continue;
        }
        const double sigma = level_sigma(cfg_, static_cast<int>(o), k);
        const auto kernel = kernels::gaussian_kernel(sigma, kernels::gaussian_radius(sigma));
        reset_graph();
        const Grid<Expr> src = leaves(o == 0 ? input : levels_o[0]);
        levels_o.push_back(materialize(kernels::convolve_separable(src, kernel, kernel)));
      }
    }
  }

  void extrema() {
    s_.begin_stage("extrema");
    reset_graph();
    std::vector<Expr> masks;
    masks.reserve(layout_.candidates.size());
    for (const Candidate& c : layout_.candidates) masks.push_back(extremum_mask(neighborhood(c), cfg_));
    extrema_ = s_.materialize(masks);
  }

  void localization() {
    s_.begin_stage("localize");
    reset_graph();
    OutputGroup keypoint{"keypoint", {}};
    OutputGroup offset{"offset", {}};
    for (std::size_t i = 0; i < layout_.candidates.size(); ++i) {
      const Localization loc = localize(neighborhood(layout_.candidates[i]), cfg_);
      keypoint.targets.push_back(s_.leaf(extrema_[i]) * loc.keep);
      for (const Rational& r : loc.offset) offset.targets.push_back(r.num);
      offset.targets.push_back(loc.offset[0].den);
    }
    const OutputGroup groups[] = {std::move(keypoint), std::move(offset)};
    s_.output(groups);
  }

  void orientation() {
    s_.begin_stage("orientation");
    const auto spec = kernels::HistogramSpec::uniform(static_cast<std::size_t>(cfg_.orientation_bins));
    const std::size_t nbins = spec.num_bins();
    const int r = cfg_.orientation_radius;

    // Optional square-root weights, fetched as ciphertexts first.
    std::vector<Patch<Value>> sqrt_weights;
    if (cfg_.orientation_weighting == OrientationWeighting::Sqrt) {
      reset_graph();
      std::vector<Expr> targets;
      for (const Group& g : groups_) {
        const Box px = g.box.grow(r, r, r, r);
        const Grid<Expr>& level = gauss(g.octave, g.scale);
        for (int y = px.y0; y < px.y1; ++y) {
          for (int x = px.x0; x < px.x1; ++x) {
            targets.push_back(deferred::sqrt_deferred(central_gradient(level, x, y).weight));
          }
        }
      }
      const auto cts = s_.require_ciphers(targets);
      std::size_t next = 0;
      for (const Group& g : groups_) {
        Patch<Value> p(g.box.grow(r, r, r, r));
        for (Value& v : p.data) v = Value::cipher(s_.graph().ids().next_leaf(), cts[next++]);
        sqrt_weights.push_back(std::move(p));
      }
    }

    // Phase 1: horizontal weighted sums of every bin's contributions.
    reset_graph();
    std::vector<Expr> targets;
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
      const Group& g = groups_[gi];
      const auto w = orientation_weights(cfg_, g.scale);
      const Box px = g.box.grow(r, r, r, r);
      const Grid<Expr>& level = gauss(g.octave, g.scale);
      Patch<std::vector<Expr>> contrib(px);
      Patch<Expr> weight(px);
      for (int y = px.y0; y < px.y1; ++y) {
        for (int x = px.x0; x < px.x1; ++x) {
          kernels::Gradient grad = central_gradient(level, x, y);
          if (!sqrt_weights.empty()) grad.weight = s_.leaf(sqrt_weights[gi].at(x, y));
          const auto masks = kernels::bin_masks(grad.dx, grad.dy, spec);
          auto& cell = contrib.at(x, y);
          for (const Expr& m : masks) cell.push_back(m * grad.weight);
          weight.at(x, y) = grad.weight;
        }
      }
      const Box rows = g.box.grow(0, 0, r, r);
      std::vector<Expr> terms;
      for (int y = rows.y0; y < rows.y1; ++y) {
        for (int x = rows.x0; x < rows.x1; ++x) {
          for (std::size_t j = 0; j <= nbins; ++j) {
            terms.clear();
            for (int i = -r; i <= r; ++i) {
              const Expr& e = j < nbins ? contrib.at(x + i, y)[j] : weight.at(x + i, y);
              terms.push_back(w[static_cast<std::size_t>(i + r)] * e);
            }
            targets.push_back(deferred::sum(s_.graph(), terms));
          }
        }
      }
    }
    const std::vector<Value> row_sums = s_.materialize(targets);

    // Phase 2: vertical sums give each candidate's histogram; then argmax.
    reset_graph();
    OutputGroup onehot{"orientation", {}};
    OutputGroup check{"orientation_check", {}};
    std::size_t base = 0;
    for (const Group& g : groups_) {
      const auto w = orientation_weights(cfg_, g.scale);
      const Box rows = g.box.grow(0, 0, r, r);
      auto row_sum = [&](int x, int y, std::size_t j) {
        const std::size_t cell = std::size_t(y - rows.y0) * rows.width() + (x - rows.x0);
        return s_.leaf(row_sums[base + cell * (nbins + 1) + j]);
      };
      std::vector<Expr> hist(nbins);
      std::vector<Expr> terms;
      for (std::size_t ci = g.first; ci < g.last; ++ci) {
        const Candidate& c = layout_.candidates[ci];
        for (std::size_t j = 0; j <= nbins; ++j) {
          terms.clear();
          for (int k = -r; k <= r; ++k) {
            terms.push_back(w[static_cast<std::size_t>(k + r)] * row_sum(c.x, c.y + k, j));
          }
          const Expr total = deferred::sum(s_.graph(), terms);
          if (j < nbins) {
            hist[j] = total;
          } else {
            check.targets.push_back(deferred::sum(s_.graph(), hist));
            check.targets.push_back(total);
          }
        }
        const kernels::ArgMax am = kernels::vec_argmax_onehot(hist);
        onehot.targets.insert(onehot.targets.end(), am.onehot.mask.begin(), am.onehot.mask.end());
      }
      base += std::size_t(rows.width()) * rows.height() * (nbins + 1);
    }
    const OutputGroup groups[] = {std::move(onehot), std::move(check)};
    s_.output(groups);
  }

  void descriptor() {
    s_.begin_stage("descriptor");
    const auto spec = kernels::HistogramSpec::uniform(static_cast<std::size_t>(cfg_.descriptor_bins));
    const std::size_t nbins = spec.num_bins();
    const int cells = cfg_.descriptor_cells;
    const int half = cells * kCellSize / 2;
    const int span = kCellSize * (cells - 1);

    // Phase 1: horizontal box sums over one cell width.
    reset_graph();
    std::vector<Expr> targets;
    std::vector<Box> row_boxes;
    for (const Group& g : groups_) {
      const Box px = g.box.grow(half, half - 1, half, half - 1);
      const Grid<Expr>& level = gauss(g.octave, g.scale);
      Patch<std::vector<Expr>> contrib(px);
      for (int y = px.y0; y < px.y1; ++y) {
        for (int x = px.x0; x < px.x1; ++x) {
          const kernels::Gradient grad = central_gradient(level, x, y);
          auto& cell = contrib.at(x, y);
          for (const Expr& m : kernels::bin_masks(grad.dx, grad.dy, spec)) cell.push_back(m * grad.weight);
        }
      }
      // Cell origins run from x - half to x - half + span.
      const Box rows{g.box.x0 - half, px.y0, g.box.x1 - half + span, px.y1};
      row_boxes.push_back(rows);
      std::vector<Expr> terms;
      for (int y = rows.y0; y < rows.y1; ++y) {
        for (int x = rows.x0; x < rows.x1; ++x) {
          for (std::size_t b = 0; b < nbins; ++b) {
            terms.clear();
            for (int i = 0; i < kCellSize; ++i) terms.push_back(contrib.at(x + i, y)[b]);
            targets.push_back(deferred::sum(s_.graph(), terms));
          }
        }
      }
    }
    const std::vector<Value> row_sums = s_.materialize(targets);

    // Phase 2: vertical box sums complete every cell histogram.
    reset_graph();
    targets.clear();
    std::vector<Box> cell_boxes;
    std::size_t base = 0;
    for (const Box& rows : row_boxes) {
      const Box cellbox{rows.x0, rows.y0, rows.x1, rows.y1 - (kCellSize - 1)};
      cell_boxes.push_back(cellbox);
      std::vector<Expr> terms;
      for (int y = cellbox.y0; y < cellbox.y1; ++y) {
        for (int x = cellbox.x0; x < cellbox.x1; ++x) {
          for (std::size_t b = 0; b < nbins; ++b) {
            terms.clear();
            for (int k = 0; k < kCellSize; ++k) {
              const std::size_t cell = std::size_t(y + k - rows.y0) * rows.width() + (x - rows.x0);
              terms.push_back(s_.leaf(row_sums[base + cell * nbins + b]));
            }
            targets.push_back(deferred::sum(s_.graph(), terms));
          }
        }
      }
      base += std::size_t(rows.width()) * rows.height() * nbins;
    }
    const std::vector<Value> cell_hists = s_.materialize(targets);

    // Phase 3: gather the cells of each candidate; the norm is a deferred sqrt.
    reset_graph();
    OutputGroup desc{"descriptor", {}};
    OutputGroup norm{"descriptor_norm", {}};
    base = 0;
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
      const Group& g = groups_[gi];
      const Box& cellbox = cell_boxes[gi];
      std::vector<Expr> squares;
      for (std::size_t ci = g.first; ci < g.last; ++ci) {
        const Candidate& c = layout_.candidates[ci];
        squares.clear();
        for (int j = 0; j < cells; ++j) {
          for (int i = 0; i < cells; ++i) {
            const int x0 = c.x - half + kCellSize * i;
            const int y0 = c.y - half + kCellSize * j;
            const std::size_t cell = std::size_t(y0 - cellbox.y0) * cellbox.width() + (x0 - cellbox.x0);
            for (std::size_t b = 0; b < nbins; ++b) {
              const Expr e = s_.leaf(cell_hists[base + cell * nbins + b]);
              desc.targets.push_back(e);
              squares.push_back(e * e);
            }
          }
        }
        norm.targets.push_back(deferred::sqrt_deferred(deferred::sum(s_.graph(), squares)));
      }
      base += std::size_t(cellbox.width()) * cellbox.height() * nbins;
    }
    const OutputGroup groups[] = {std::move(desc), std::move(norm)};
    s_.output(groups);
  }

  Session& s_;
  const Layout& layout_;
  const PipelineConfig& cfg_;
  std::vector<Group> groups_;
  std::vector<std::vector<Grid<Value>>> gauss_;
  std::vector<std::vector<Grid<Expr>>> gauss_leaves_;
  std::vector<std::vector<Grid<Expr>>> dog_;
  std::vector<Value> extrema_;
};

}  // namespace

protocol::Program make_program(const Layout& layout, const PipelineConfig& cfg) {
  return [layout, cfg](Session& s) { Server(s, layout, cfg).run(); };
}

// ---------------------------------------------------------------------------
// Client side

namespace {

const std::vector<double>& group(const std::map<std::string, std::vector<double>>& outputs,
                                 const std::string& name, std::size_t expected) {
  const auto it = outputs.find(name);
  if (it == outputs.end()) throw Error("missing output group '" + name + "'");
  if (it->second.size() != expected) {
    throw Error("output group '" + name + "' has " + std::to_string(it->second.size()) +
                " values, expected " + std::to_string(expected));
  }
  return it->second;
}

}  // namespace

KeypointSet decode(const Layout& layout, const PipelineConfig& cfg,
                   const std::map<std::string, std::vector<double>>& outputs, DecodeStats* stats) {
  const std::size_t n = layout.candidates.size();
  const std::size_t bins = static_cast<std::size_t>(cfg.orientation_bins);
  const std::size_t dlen = static_cast<std::size_t>(cfg.descriptor_cells * cfg.descriptor_cells *
                                                    cfg.descriptor_bins);
  const auto& keep = group(outputs, "keypoint", n);
  const auto& offset = group(outputs, "offset", 4 * n);
  const auto& onehot = group(outputs, "orientation", bins * n);
  const auto& check = group(outputs, "orientation_check", 2 * n);
  const auto& desc = group(outputs, "descriptor", dlen * n);
  const auto& norm = group(outputs, "descriptor_norm", n);

  DecodeStats local;
  local.candidates = n;
  KeypointSet set;
  for (std::size_t i = 0; i < n; ++i) {
    double mass = 0.0;
    for (std::size_t j = 0; j < bins; ++j) mass += onehot[i * bins + j];
    local.max_onehot_error = std::max(local.max_onehot_error, std::abs(mass - 1.0));
    local.max_conservation_error =
        std::max(local.max_conservation_error, std::abs(check[2 * i] - check[2 * i + 1]));
    if (!(keep[i] > 0.5)) continue;

    const Candidate& c = layout.candidates[i];
    const double det = offset[4 * i + 3];
    const double dx = det != 0.0 ? offset[4 * i] / det : 0.0;
    const double dy = det != 0.0 ? offset[4 * i + 1] / det : 0.0;
    const double step = std::ldexp(1.0, c.octave);
    Keypoint k;
    k.x = (c.x + dx) * step;
    k.y = (c.y + dy) * step;
    k.octave = c.octave;
    k.scale = c.scale;
    const auto first = onehot.begin() + static_cast<std::ptrdiff_t>(i * bins);
    k.orientation = static_cast<int>(std::max_element(first, first + static_cast<std::ptrdiff_t>(bins)) - first);
    k.descriptor.assign(dlen, 0.0);
    if (norm[i] >= kNormEpsilon) {
      for (std::size_t d = 0; d < dlen; ++d) k.descriptor[d] = desc[i * dlen + d] / norm[i];
    }
    set.keypoints.push_back(std::move(k));
  }
  set.sort();
  if (stats) *stats = local;
  return set;
}

PipelineResult run_pipeline(const Image& img, const RunConfig& cfg) {
  cfg.validate();
  const Layout layout = Layout::make(img.width, img.height, cfg.pipeline);
  PipelineResult result;
  result.candidates = layout.candidates.size();
  if (cfg.mode == Mode::Plaintext) {
    result.keypoints = oracle::run(img, cfg.pipeline);
    return result;
  }

  protocol::ProtocolOptions opts;
  opts.sim = cfg.sim;
  opts.seed = cfg.seed;
  opts.padding = cfg.padding;
  protocol::Client client(cfg.sim, cfg.seed ^ 0xc11e47c11e47ULL);
  const protocol::Program program = make_program(layout, cfg.pipeline);
  const std::uint64_t before = sim::Decryptor::calls(sim::Party::Server);
  protocol::RunResult run = cfg.mode == Mode::Interactive
                                ? protocol::run_interactive(program, client, img.pixels, opts)
                                : protocol::run_deferred(program, client, img.pixels, opts);
  result.server_decrypts = sim::Decryptor::calls(sim::Party::Server) - before;
  result.keypoints = decode(layout, cfg.pipeline, run.outputs, &result.checks);
  result.trace = std::move(run.trace);
  result.stages = std::move(run.stages);
  result.leakage = run.leakage;
  for (const auto& st : result.stages) {
    result.depth.push_back({st.name, cfg.sim.depth_budget - st.min_level});
  }
  return result;
}

}  // namespace fheadapt::sift
