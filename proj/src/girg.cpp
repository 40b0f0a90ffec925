#include "spreadlab/girg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spreadlab/error.hpp"
#include "spreadlab/parallel.hpp"

namespace spreadlab::girg {

void GirgParams::validate() const {
  if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("girg: n must be positive and finite");
  if (d < 1 || d > 8) throw ValidationError("girg: d must be in 1..8");
  if (!(tau > 2.0) || !std::isfinite(tau))
    throw ValidationError("girg: tau must exceed 2 (infinite mean weight otherwise)");
  if (!(alpha > 1.0)) throw ValidationError("girg: alpha must exceed 1");
  if (!(c > 0.0 && c <= 1.0)) throw ValidationError("girg: c must lie in (0, 1]");
}

double GirgParams::side() const { return std::pow(n, 1.0 / d); }

double pareto_from_uniform(double u, double tau) { return std::pow(u, -1.0 / (tau - 1.0)); }

std::vector<double> sample_weights(std::size_t count, double tau, Rng& rng) {
  if (!(tau > 2.0)) throw ValidationError("sample_weights: tau must exceed 2 (infinite mean)");
  std::vector<double> w(count);
  for (auto& x : w) x = pareto_from_uniform(rng.uniform_open(), tau);
  return w;
}

double connection_probability(double wu, double wv, double dist, int d, double alpha, double c) {
  if (dist <= 0.0) return c;
  const double ratio = wu * wv / std::pow(dist, d);
  if (ratio >= 1.0) return c;
  if (std::isinf(alpha)) return 0.0;
  return c * std::pow(ratio, alpha);
}

VertexSet sample_vertices(const GirgParams& p) {
  p.validate();
  Rng rng = Rng::stream(p.seed, 0);
  const std::uint64_t count = rng.poisson(p.n);
  if (count > p.max_nodes)
    throw ValidationError("girg: drawn node count " + std::to_string(count) +
                          " exceeds max_nodes " + std::to_string(p.max_nodes));
  const double side = p.side();
  VertexSet vs;
  vs.coords.resize(count * static_cast<std::size_t>(p.d));
  for (auto& x : vs.coords) {
    x = rng.uniform() * side;
    if (x >= side) x = 0.0;
  }
  vs.weights = sample_weights(count, p.tau, rng);
  return vs;
}

namespace {

using EdgeList = std::vector<std::pair<NodeId, NodeId>>;

constexpr int kMaxLayers = 64;

// Nodes of one weight layer [2^i, 2^(i+1)), sorted by Morton code of their
// finest-level cell, with per-level cell offsets.
struct Layer {
  std::vector<NodeId> ids;
  std::vector<double> coords;   // d per node, sorted order
  std::vector<double> weights;
  std::vector<std::uint64_t> codes;
  std::vector<std::vector<std::uint32_t>> offsets;  // [level][cell], size 2^(level*d)+1
  double bound = 0.0;
};

std::uint64_t interleave(const std::uint32_t* cell, int d, int bits) {
  std::uint64_t code = 0;
  for (int b = 0; b < bits; ++b)
    for (int k = 0; k < d; ++k)
      code |= static_cast<std::uint64_t>((cell[k] >> b) & 1U) << (b * d + k);
  return code;
}

void deinterleave(std::uint64_t code, int d, int bits, std::uint32_t* cell) {
  for (int k = 0; k < d; ++k) cell[k] = 0;
  for (int b = 0; b < bits; ++b)
    for (int k = 0; k < d; ++k)
      cell[k] |= static_cast<std::uint32_t>((code >> (b * d + k)) & 1U) << b;
}

// Distinct values of {a-1, a, a+1} mod m.
int axis_neighbours(std::uint32_t a, std::uint32_t m, std::uint32_t* out) {
  int count = 0;
  auto push = [&](std::uint32_t v) {
    for (int i = 0; i < count; ++i)
      if (out[i] == v) return;
    out[count++] = v;
  };
  push(a);
  push((a + 1) % m);
  push((a + m - 1) % m);
  return count;
}

class HierarchicalSampler {
 public:
  HierarchicalSampler(const GirgParams& p, const VertexSet& vs)
      : p_(p), vs_(vs), d_(p.d), side_(p.side()), half_side_(0.5 * side_) {
    const std::size_t count = vs.weights.size();
    const double lg = count > 1 ? std::log2(static_cast<double>(count)) : 0.0;
    levels_ = std::clamp(static_cast<int>(std::lround(lg / d_)), 0, std::min(60 / d_, 30));
    build_layers();
  }

  EdgeList run(unsigned threads) {
    struct Task {
      int i, j, level;  // level == -1: type I at target level
    };
    std::vector<Task> tasks;
    for (int i = 0; i < static_cast<int>(layers_.size()); ++i) {
      if (layers_[i].ids.empty()) continue;
      for (int j = i; j < static_cast<int>(layers_.size()); ++j) {
        if (layers_[j].ids.empty()) continue;
        const int target = target_level(i, j);
        for (int l = 1; l <= target; ++l) tasks.push_back({i, j, l});
        tasks.push_back({i, j, -1});
      }
    }
    std::vector<EdgeList> results(tasks.size());
    std::atomic<std::size_t> produced{0};
    parallel_for(tasks.size(), threads, [&](std::size_t t) {
      const Task& task = tasks[t];
      const std::uint64_t stream =
          1 + (static_cast<std::uint64_t>(task.i) * kMaxLayers + task.j) * kMaxLayers +
          static_cast<std::uint64_t>(task.level + 1);
      Rng rng = Rng::stream(p_.seed, stream);
      if (task.level < 0)
        near_pairs(task.i, task.j, rng, results[t]);
      else
        far_pairs(task.i, task.j, task.level, rng, results[t]);
      if (produced.fetch_add(results[t].size()) + results[t].size() > p_.max_edges)
        throw ValidationError("girg: edge count exceeds max_edges " + std::to_string(p_.max_edges));
    });
    EdgeList all;
    all.reserve(produced.load());
    for (auto& r : results) {
      all.insert(all.end(), r.begin(), r.end());
      EdgeList().swap(r);
    }
    return all;
  }

 private:
  int target_level(int i, int j) const {
    const double ratio = p_.n / (layers_[i].bound * layers_[j].bound);
    if (ratio < 1.0) return 0;
    const int l = static_cast<int>(std::floor(std::log2(ratio) / d_));
    return std::clamp(l, 0, levels_);
  }

  void build_layers() {
    const std::size_t count = vs_.weights.size();
    std::vector<int> layer_of(count);
    int max_layer = -1;
    for (std::size_t v = 0; v < count; ++v) {
      const int l = std::clamp(static_cast<int>(std::floor(std::log2(vs_.weights[v]))), 0,
                               kMaxLayers - 1);
      layer_of[v] = l;
      max_layer = std::max(max_layer, l);
    }
    layers_.resize(static_cast<std::size_t>(max_layer + 1));
    for (int i = 0; i <= max_layer; ++i) layers_[i].bound = std::ldexp(1.0, i + 1);

    const std::uint32_t cells_per_axis = 1U << levels_;
    std::vector<std::uint64_t> code(count);
    std::uint32_t cell[8];
    for (std::size_t v = 0; v < count; ++v) {
      for (int k = 0; k < d_; ++k) {
        const double u = vs_.coords[v * d_ + k] / side_;
        cell[k] = std::min(cells_per_axis - 1, static_cast<std::uint32_t>(u * cells_per_axis));
      }
      code[v] = interleave(cell, d_, levels_);
      layers_[layer_of[v]].ids.push_back(static_cast<NodeId>(v));
    }

    std::vector<int> max_level(layers_.size(), 0);
    for (std::size_t i = 0; i < layers_.size(); ++i)
      for (std::size_t j = i; j < layers_.size(); ++j) {
        const int t = target_level(static_cast<int>(i), static_cast<int>(j));
        max_level[i] = std::max(max_level[i], t);
        max_level[j] = std::max(max_level[j], t);
      }

    for (std::size_t i = 0; i < layers_.size(); ++i) {
      Layer& layer = layers_[i];
      std::sort(layer.ids.begin(), layer.ids.end(), [&](NodeId a, NodeId b) {
        return code[a] != code[b] ? code[a] < code[b] : a < b;
      });
      const std::size_t m = layer.ids.size();
      layer.coords.resize(m * d_);
      layer.weights.resize(m);
      layer.codes.resize(m);
      for (std::size_t x = 0; x < m; ++x) {
        const NodeId v = layer.ids[x];
        std::copy_n(vs_.coords.begin() + static_cast<std::ptrdiff_t>(v) * d_, d_,
                    layer.coords.begin() + static_cast<std::ptrdiff_t>(x) * d_);
        layer.weights[x] = vs_.weights[v];
        layer.codes[x] = code[v];
      }
      if (m == 0) continue;
      layer.offsets.resize(static_cast<std::size_t>(max_level[i]) + 1);
      for (int l = 0; l <= max_level[i]; ++l) {
        const std::size_t cells = std::size_t{1} << (l * d_);
        const int shift = (levels_ - l) * d_;
        auto& off = layer.offsets[l];
        off.assign(cells + 1, 0);
        for (std::uint64_t c : layer.codes) ++off[(c >> shift) + 1];
        for (std::size_t c = 0; c < cells; ++c) off[c + 1] += off[c];
      }
    }
  }

  // True iff u < p(x, y). Skips the power for pairs rejected by p <= c * ratio.
  bool accept(const Layer& a, std::size_t x, const Layer& b, std::size_t y, double u) const {
    if (u >= p_.c) return false;
    const double* pa = &a.coords[x * d_];
    const double* pb = &b.coords[y * d_];
    double r2 = 0.0;
    for (int k = 0; k < d_; ++k) {
      double dx = std::abs(pa[k] - pb[k]);
      if (dx > half_side_) dx = side_ - dx;
      r2 += dx * dx;
    }
    double rd;
    switch (d_) {
      case 1: rd = std::sqrt(r2); break;
      case 2: rd = r2; break;
      case 3: rd = r2 * std::sqrt(r2); break;
      default: rd = std::pow(r2, 0.5 * d_);
    }
    const double ww = a.weights[x] * b.weights[y];
    if (ww >= rd) return true;
    if (std::isinf(p_.alpha)) return false;
    const double ratio = ww / rd;
    if (u >= p_.c * ratio) return false;
    return u < p_.c * std::pow(ratio, p_.alpha);
  }

  // Distinct nonempty cells of a layer at a level, in increasing cell order.
  template <typename F>
  void for_each_cell(const Layer& layer, int level, F&& f) const {
    const auto& off = layer.offsets[level];
    const int shift = (levels_ - level) * d_;
    std::size_t x = 0;
    while (x < layer.codes.size()) {
      const std::uint64_t cell = layer.codes[x] >> shift;
      f(cell);
      x = off[cell + 1];
    }
  }

  // Cells adjacent to (or equal to) `cell` at `level`.
  template <typename F>
  void for_each_neighbour(std::uint64_t cell, int level, F&& f) const {
    std::uint32_t coord[8], choices[8][6], counts[8];
    deinterleave(cell, d_, level, coord);
    const std::uint32_t m = 1U << level;
    for (int k = 0; k < d_; ++k) counts[k] = axis_neighbours(coord[k], m, choices[k]);
    enumerate(choices, counts, level, f);
  }

  // Cells at `level` whose parents are adjacent to the parent of `cell` but
  // which are not adjacent to `cell` themselves.
  template <typename F>
  void for_each_far_cell(std::uint64_t cell, int level, F&& f) const {
    std::uint32_t coord[8], choices[8][6], counts[8], parents[3];
    deinterleave(cell, d_, level, coord);
    const std::uint32_t pm = 1U << (level - 1);
    for (int k = 0; k < d_; ++k) {
      const int np = axis_neighbours(coord[k] >> 1, pm, parents);
      counts[k] = 0;
      for (int q = 0; q < np; ++q) {
        choices[k][counts[k]++] = 2 * parents[q];
        choices[k][counts[k]++] = 2 * parents[q] + 1;
      }
    }
    const std::uint32_t m = 1U << level;
    enumerate(choices, counts, level, [&](std::uint64_t other, const std::uint32_t* oc) {
      bool adjacent = true;
      for (int k = 0; k < d_ && adjacent; ++k) {
        const std::uint32_t delta = (oc[k] + m - coord[k]) % m;
        adjacent = delta == 0 || delta == 1 || delta == m - 1;
      }
      if (!adjacent) f(other, oc);
    });
  }

  template <typename F>
  void enumerate(const std::uint32_t (&choices)[8][6], const std::uint32_t* counts, int level,
                 F&& f) const {
    std::uint32_t idx[8] = {0}, oc[8];
    while (true) {
      for (int k = 0; k < d_; ++k) oc[k] = choices[k][idx[k]];
      f(interleave(oc, d_, level), static_cast<const std::uint32_t*>(oc));
      int k = 0;
      while (k < d_ && ++idx[k] == counts[k]) idx[k++] = 0;
      if (k == d_) return;
    }
  }

  // Smallest possible distance between points of two cells at a level.
  double cell_gap(const std::uint32_t* a, const std::uint32_t* b, int level) const {
    const std::uint32_t m = 1U << level;
    double sum = 0.0;
    for (int k = 0; k < d_; ++k) {
      const std::uint32_t delta = (b[k] + m - a[k]) % m;
      const std::uint32_t g = std::min(delta, m - delta);
      const double gap = g > 0 ? (g - 1.0) * side_ / m : 0.0;
      sum += gap * gap;
    }
    return std::sqrt(sum);
  }

  void near_pairs(int i, int j, Rng& rng, EdgeList& out) const {
    const Layer& A = layers_[i];
    const Layer& B = layers_[j];
    const int level = target_level(i, j);
    for_each_cell(A, level, [&](std::uint64_t ca) {
      const std::size_t a0 = A.offsets[level][ca], a1 = A.offsets[level][ca + 1];
      for_each_neighbour(ca, level, [&](std::uint64_t cb, const std::uint32_t*) {
        if (i == j && cb < ca) return;
        const std::size_t b0 = B.offsets[level][cb], b1 = B.offsets[level][cb + 1];
        for (std::size_t x = a0; x < a1; ++x) {
          const std::size_t start = (i == j && ca == cb) ? x + 1 : b0;
          for (std::size_t y = start; y < b1; ++y)
            if (accept(A, x, B, y, rng.uniform())) push(out, A.ids[x], B.ids[y]);
        }
      });
    });
  }

  void far_pairs(int i, int j, int level, Rng& rng, EdgeList& out) const {
    const Layer& A = layers_[i];
    const Layer& B = layers_[j];
    std::uint32_t coord_a[8];
    for_each_cell(A, level, [&](std::uint64_t ca) {
      deinterleave(ca, d_, level, coord_a);
      const std::size_t a0 = A.offsets[level][ca], a1 = A.offsets[level][ca + 1];
      for_each_far_cell(ca, level, [&](std::uint64_t cb, const std::uint32_t* coord_b) {
        if (i == j && cb < ca) return;
        const std::size_t b0 = B.offsets[level][cb], b1 = B.offsets[level][cb + 1];
        if (b0 == b1) return;
        const double bound = connection_probability(A.bound, B.bound,
                                                    cell_gap(coord_a, coord_b, level), d_,
                                                    p_.alpha, p_.c);
        if (bound <= 0.0) return;
        const std::size_t nb = b1 - b0;
        const std::uint64_t total = static_cast<std::uint64_t>(a1 - a0) * nb;
        const double log_q = std::log1p(-bound);
        std::uint64_t k = 0;
        while (true) {
          const double skip = std::floor(std::log(rng.uniform_open()) / log_q);
          if (!(skip < static_cast<double>(total - k))) break;
          k += static_cast<std::uint64_t>(skip);
          const std::size_t x = a0 + k / nb, y = b0 + k % nb;
          if (accept(A, x, B, y, rng.uniform() * bound)) push(out, A.ids[x], B.ids[y]);
          ++k;
        }
      });
    });
  }

  static void push(EdgeList& out, NodeId a, NodeId b) {
    out.emplace_back(std::min(a, b), std::max(a, b));
  }

  const GirgParams& p_;
  const VertexSet& vs_;
  int d_;
  double side_;
  double half_side_;
  int levels_ = 0;
  std::vector<Layer> layers_;
};

SpatialGraph make_graph(const GirgParams& p, VertexSet vs, EdgeList edges) {
  return SpatialGraph(Metric::torus(static_cast<std::size_t>(p.d), p.side()),
                      static_cast<std::size_t>(p.d), std::move(vs.coords), std::move(vs.weights),
                      std::move(edges));
}

}  // namespace

SpatialGraph sample_girg(const GirgParams& p, unsigned threads) {
  VertexSet vs = sample_vertices(p);
  EdgeList edges;
  if (vs.weights.size() > 1) {
    HierarchicalSampler sampler(p, vs);
    edges = sampler.run(std::max(1U, threads));
  }
  return make_graph(p, std::move(vs), std::move(edges));
}

SpatialGraph sample_girg_naive(const GirgParams& p) {
  p.validate();
  if (p.n > kNaiveMaxN) throw ValidationError("girg: naive sampler refuses n > 1e4");
  VertexSet vs = sample_vertices(p);
  Rng rng = Rng::stream(p.seed, 2);
  const std::size_t count = vs.weights.size();
  const double side = p.side();
  const auto d = static_cast<std::size_t>(p.d);
  EdgeList edges;
  for (std::size_t u = 0; u < count; ++u)
    for (std::size_t v = u + 1; v < count; ++v) {
      const double dist = torus_distance(std::span<const double>(&vs.coords[u * d], d),
                                         std::span<const double>(&vs.coords[v * d], d), side);
      const double prob = connection_probability(vs.weights[u], vs.weights[v], dist, p.d,
                                                 p.alpha, p.c);
      if (rng.uniform() < prob) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
  return make_graph(p, std::move(vs), std::move(edges));
}

}  // namespace spreadlab::girg
