#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "spreadlab/error.hpp"
#include "spreadlab/estimate.hpp"
#include "spreadlab/girg.hpp"
#include "spreadlab/gowalla.hpp"
#include "spreadlab/graph_io.hpp"
#include "spreadlab/parallel.hpp"
#include "spreadlab/rewire.hpp"
#include "spreadlab/spread.hpp"
#include "spreadlab/theory.hpp"

namespace spreadlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a64_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  if (in.bad()) throw IoError("read error on " + path.string());
  return h;
}

namespace {

std::string hex64(std::uint64_t x) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << x;
  return s.str();
}

double parse_real(const std::string& s, const std::string& flag) {
  std::string t = s;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "inf" || t == "infinity" || t == "+inf") return INFINITY;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ValidationError(flag + ": not a number: '" + s + "'");
  return v;
}

std::vector<double> parse_list(const std::string& s, std::size_t want, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(item, flag));
  if (out.size() != want) {
    throw ValidationError(flag + ": expected " + std::to_string(want) + " comma-separated values");
  }
  return out;
}

void make_parent(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
}

void save_graph(const fs::path& path, const SpatialGraph& g) {
  make_parent(path);
  write_sgraph(path, g);
}

std::ofstream open_output(const fs::path& path) {
  make_parent(path);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

void close_output(std::ofstream& f, const fs::path& path) {
  f.close();
  if (!f) throw IoError("write error on " + path.string());
}

struct Manifest {
  Manifest(std::string cmd, std::vector<std::string> args) : command(std::move(cmd)), argv(std::move(args)) {}

  std::string command;
  std::vector<std::string> argv;
  json seeds = json::object();
  json parameters = json::object();
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
};

fs::path default_manifest(const fs::path& primary_output, const std::string& flag) {
  if (!flag.empty()) return flag;
  return primary_output.parent_path() / "manifest.json";
}

void write_manifest(const fs::path& path, const Manifest& m) {
  json j;
  j["tool"] = "spreadlab";
  j["version"] = kVersion;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["seeds"] = m.seeds;
  j["parameters"] = m.parameters;
  j["inputs"] = json::array();
  for (const auto& p : m.inputs) {
    j["inputs"].push_back({{"path", p.string()}, {"fnv1a64", hex64(fnv1a64_file(p))},
                           {"bytes", fs::file_size(p)}});
  }
  j["outputs"] = json::array();
  for (const auto& p : m.outputs) j["outputs"].push_back(p.string());
  auto f = open_output(path);
  f << j.dump(2) << '\n';
  close_output(f, path);
}

SpatialGraph load_graph(const fs::path& p) { return read_sgraph(p); }

// Option values shared by the subcommands.
struct Opts {
  // model
  int d = 2;
  double tau = 2.78;
  std::string alpha = "1.2";
  double mu = 0.0;
  std::optional<double> nu;
  double zeta = 0.0;
  double c = 1.0;
  double n = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool naive = false;
  bool json_out = false;
  // files
  std::string graph, out, out_dir, manifest, curves, edges, checkins, idmap, lcc_out, replay_manifest;
  // simulate
  std::string base;
  double beta = 1.0;
  std::size_t runs = 1;
  std::optional<NodeId> source;
  std::string source_xy, source_latlon, crop;
  std::size_t heatmap_boxes = 100;
  std::optional<std::size_t> max_reached;
  bool no_times = false;
  // estimation
  double lmin = 10, lmax = 100;
  bool km = false;
  std::size_t points = 50;
  double ilow = 2.17, ihigh = 3.70;
  std::string mode = "loglog";
  // phase diagram
  std::string x_axis = "mu:0:2:41", y_axis = "zeta:0:4:41";
  // edge tail
  double l1 = 20, l2 = 100;
  std::optional<double> weight_cap;
  // rewire
  std::size_t sweeps = 10;
  std::uint64_t tie_seed = 0;
  bool no_verify = false;
};

double alpha_of(const Opts& o) { return parse_real(o.alpha, "--alpha"); }

theory::ModelPoint model_point(const Opts& o) {
  theory::ModelPoint m;
  m.d = o.d;
  m.tau = o.tau;
  m.alpha = alpha_of(o);
  m.mu = o.mu;
  m.zeta = o.zeta;
  m.nu = o.nu;
  m.validate();
  return m;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// --- subcommands ---------------------------------------------------------

int cmd_sample(const Opts& o, const std::vector<std::string>& argv, std::ostream& out) {
  girg::GirgParams p;
  p.n = o.n;
  p.d = o.d;
  p.tau = o.tau;
  p.alpha = alpha_of(o);
  p.c = o.c;
  p.seed = o.seed;
  p.validate();
  const auto g = o.naive ? girg::sample_girg_naive(p) : girg::sample_girg(p, o.threads);
  const fs::path path = o.out;
  save_graph(path, g);
  Manifest m{"sample", argv};
  m.seeds["seed"] = o.seed;
  m.parameters = {{"n", p.n}, {"d", p.d}, {"tau", p.tau}, {"alpha", o.alpha}, {"c", p.c},
                  {"sampler", o.naive ? "naive" : "hierarchical"}};
  m.outputs = {path};
  write_manifest(default_manifest(path, o.manifest), m);
  const auto st = degree_stats(g);
  out << "nodes: " << g.num_nodes() << "\nedges: " << g.num_edges()
      << "\nmean_degree: " << format_real(st.mean) << '\n';
  return 0;
}

NodeId resolve_source(const Opts& o, const SpatialGraph& g) {
  const int given = (o.source ? 1 : 0) + (!o.source_xy.empty() ? 1 : 0) + (!o.source_latlon.empty() ? 1 : 0);
  if (given != 1) throw ValidationError("simulate: give exactly one of --source, --source-xy, --source-latlon");
  if (o.source) {
    if (*o.source >= g.num_nodes()) throw ValidationError("--source: node id out of range");
    return *o.source;
  }
  if (!o.source_latlon.empty()) {
    if (g.metric().kind != MetricKind::Haversine) throw ValidationError("--source-latlon needs a haversine graph");
    const auto ll = parse_list(o.source_latlon, 2, "--source-latlon");
    return gowalla::find_seed_node(g, ll[0], ll[1]);
  }
  const auto xy = parse_list(o.source_xy, g.dim(), "--source-xy");
  if (g.num_nodes() == 0) throw ValidationError("simulate: empty graph");
  NodeId best = 0;
  double best_d = INFINITY;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const double dist = g.metric().distance(g.position(v), xy);
    if (dist < best_d) {
      best_d = dist;
      best = v;
    }
  }
  return best;
}

int cmd_simulate(const Opts& o, const std::vector<std::string>& argv, std::ostream& out) {
  spread::PenaltyParams p;
  if (o.base == "weight") {
    p.base = spread::PenaltyBase::Weight;
  } else if (o.base == "degree") {
    p.base = spread::PenaltyBase::Degree;
  } else {
    throw ValidationError("--base must be 'weight' or 'degree'");
  }
  p.mu = o.mu;
  p.nu = o.nu;
  p.zeta = o.zeta;
  p.beta = o.beta;
  p.validate();
  if (o.runs < 1) throw ValidationError("--runs must be at least 1");
  const fs::path graph_path = o.graph;
  const auto g = load_graph(graph_path);
  const NodeId source = resolve_source(o, g);
  spread::SpreadOptions sopts;
  if (o.max_reached) sopts.max_reached = *o.max_reached;
  const auto results = spread::run_epidemics(g, p, source, o.runs, o.seed, o.threads, sopts);

  const fs::path dir = o.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  Manifest m{"simulate", argv};
  m.seeds["seed"] = o.seed;
  m.parameters = {{"mu", p.mu}, {"nu", opt_json(p.nu)}, {"zeta", p.zeta}, {"beta", p.beta},
                  {"base", o.base}, {"runs", o.runs}, {"source", source}};
  m.inputs = {graph_path};

  std::vector<spread::EpidemicCurve> curves;
  for (const auto& r : results) curves.push_back(spread::epidemic_curve(r));
  {
    const auto path = dir / "curves.csv";
    auto f = open_output(path);
    f << "run,count,time\n";
    for (std::size_t r = 0; r < curves.size(); ++r)
      for (std::size_t i = 0; i < curves[r].counts.size(); ++i)
        f << r << ',' << curves[r].counts[i] << ',' << format_real(curves[r].times[i]) << '\n';
    close_output(f, path);
    m.outputs.push_back(path);
  }
  if (!o.no_times) {
    const auto path = dir / "times.csv";
    auto f = open_output(path);
    f << "run,node,time,rank\n";
    for (std::size_t r = 0; r < results.size(); ++r)
      for (std::size_t k = 0; k < results[r].sequence.size(); ++k) {
        const NodeId v = results[r].sequence[k];
        f << r << ',' << v << ',' << format_real(results[r].times[v]) << ',' << k << '\n';
      }
    close_output(f, path);
    m.outputs.push_back(path);
  }
  bool same_grid = true;
  for (const auto& c : curves) same_grid = same_grid && c.counts == curves.front().counts;
  if (same_grid) {
    const auto q = spread::curve_quantiles(curves);
    const auto path = dir / "quantiles.csv";
    auto f = open_output(path);
    f << "count";
    for (double pr : q.probs) f << ",q" << format_real(pr);
    f << '\n';
    for (std::size_t i = 0; i < q.counts.size(); ++i) {
      f << q.counts[i];
      for (const auto& col : q.values) f << ',' << format_real(col[i]);
      f << '\n';
    }
    close_output(f, path);
    m.outputs.push_back(path);
  }
  if (o.heatmap_boxes > 0 && g.dim() == 2) {
    std::optional<spread::BoundingBox> crop;
    if (!o.crop.empty()) {
      const auto b = parse_list(o.crop, 4, "--crop");
      crop = spread::BoundingBox{b[0], b[1], b[2], b[3]};
    }
    const auto grid = spread::heatmap_grid(results.front(), g, o.heatmap_boxes, crop);
    const auto path = dir / "grid.csv";
    auto f = open_output(path);
    f << "bx,by,rank\n";
    for (std::size_t by = 0; by < grid.boxes; ++by)
      for (std::size_t bx = 0; bx < grid.boxes; ++bx) f << bx << ',' << by << ',' << format_real(grid.at(bx, by)) << '\n';
    close_output(f, path);
    m.outputs.push_back(path);
    m.parameters["heatmap"] = {{"boxes", grid.boxes},
                               {"box", {grid.box.x0, grid.box.y0, grid.box.x1, grid.box.y1}}};
  }
  write_manifest(default_manifest(dir / "curves.csv", o.manifest), m);

  std::vector<double> half;
  for (const auto& c : curves) half.push_back(spread::saturation_time(c, 0.5));
  out << "source: " << source << "\nruns: " << results.size() << "\nreached: " << results.front().reached()
      << "\nmedian_half_time: " << format_real(spread::quantile(half, 0.5)) << '\n';
  return 0;
}

void write_report(std::ostream& out, const theory::PhaseReport& r, bool as_json) {
  if (as_json) {
    json j{{"phase", theory::phase_name(r.phase)},
           {"region", std::string(1, theory::region_letter(r.region))},
           {"phi", opt_json(r.phi)},
           {"delta", opt_json(r.delta)},
           {"psi", opt_json(r.psi)},
           {"eta_star", opt_json(r.eta_star)},
           {"s_star", r.s_star && std::isinf(*r.s_star) ? json("inf") : opt_json(r.s_star)},
           {"boundary", r.boundary},
           {"upper_bound_only", r.upper_bound_only}};
    out << j.dump(2) << '\n';
    return;
  }
  auto line = [&](const char* k, const std::optional<double>& v) {
    if (v) out << k << ": " << format_real(*v) << '\n';
  };
  out << "phase: " << theory::phase_name(r.phase) << "\nregion: " << theory::region_letter(r.region) << '\n';
  line("phi", r.phi);
  line("delta", r.delta);
  line("psi", r.psi);
  line("eta_star", r.eta_star);
  line("s_star", r.s_star);
  if (r.boundary) out << "boundary: true\n";
  if (r.upper_bound_only) out << "upper_bound_only: true\n";
}

int cmd_classify(const Opts& o, std::ostream& out) {
  write_report(out, theory::classify(model_point(o)), o.json_out);
  return 0;
}

theory::Axis parse_axis(const std::string& s, const std::string& flag) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 4) throw ValidationError(flag + ": expected name:lo:hi:steps");
  theory::Axis a;
  a.name = parts[0];
  a.lo = parse_real(parts[1], flag);
  a.hi = parse_real(parts[2], flag);
  a.steps = static_cast<int>(parse_real(parts[3], flag));
  if (a.steps < 1) throw ValidationError(flag + ": steps must be positive");
  theory::ModelPoint probe;
  theory::set_parameter(probe, a.name, a.lo);
  return a;
}

int cmd_phase_diagram(const Opts& o, const std::vector<std::string>& argv, std::ostream& out) {
  theory::ModelPoint base;
  base.d = o.d;
  base.tau = o.tau;
  base.alpha = alpha_of(o);
  base.mu = o.mu;
  base.zeta = o.zeta;
  const auto x = parse_axis(o.x_axis, "--x"), y = parse_axis(o.y_axis, "--y");
  const auto cells = theory::phase_diagram_grid(base, x, y);
  const fs::path path = o.out;
  auto f = open_output(path);
  f << x.name << ',' << y.name << ",phase,region,exponent,boundary\n";
  std::map<char, std::size_t> tally;
  for (const auto& c : cells) {
    const char reg = theory::region_letter(c.report.region);
    ++tally[reg];
    f << format_real(c.x) << ',' << format_real(c.y) << ',' << theory::phase_name(c.report.phase) << ','
      << reg << ',' << format_real(c.exponent) << ',' << (c.report.boundary ? 1 : 0) << '\n';
  }
  close_output(f, path);
  Manifest m{"phase-diagram", argv};
  m.parameters = {{"d", base.d}, {"tau", base.tau}, {"alpha", o.alpha}, {"mu", base.mu},
                  {"zeta", base.zeta}, {"x", o.x_axis}, {"y", o.y_axis}};
  m.outputs = {path};
  write_manifest(default_manifest(path, o.manifest), m);
  out << "cells: " << cells.size() << '\n';
  for (const auto& [reg, count] : tally) out << "region " << reg << ": " << count << '\n';
  return 0;
}

int cmd_estimate_tau(const Opts& o, const std::vector<std::string>& argv, std::ostream& out) {
  const fs::path graph_path = o.graph;
  const auto g = load_graph(graph_path);
  std::vector<double> deg;
  for (auto k : g.degrees())
    if (k > 0) deg.push_back(k);
  const auto r = estimate::estimate_tail_index(deg);
  out << "tau_hat: " << format_real(r.tau_hat) << "\ngamma_hat: " << format_real(r.gamma_hat)
      << "\nkappa: " << r.kappa << "\nplateau: " << (r.plateau ? "true" : "false") << '\n';
  if (!r.plateau) out << "warning: no plateau in the Hill plot, kappa = ceil(n^(2/3))\n";
  if (!o.out.empty()) {
    const fs::path path = o.out;
    auto f = open_output(path);
    f << "kappa,gamma_hat,tau_hat\n";
    for (const auto& [k, gm] : r.kappa_sweep) f << k << ',' << format_real(gm) << ',' << format_real(1.0 + 1.0 / gm) << '\n';
    close_output(f, path);
    Manifest m{"estimate-tau", argv};
    m.inputs = {graph_path};
    m.outputs = {path};
    write_manifest(default_manifest(path, o.manifest), m);
  }
  return 0;
}

int cmd_estimate_alpha(const Opts& o, const std::vector<std::string>& argv, std::ostream& out) {
  const fs::path graph_path = o.graph;
  const auto g = load_graph(graph_path);
  if (o.km && g.metric().kind != MetricKind::Haversine) {
    throw ValidationError("--km needs a graph with the haversine metric");
  }
  const auto tail = estimate::empirical_truncated_tail(g, o.lmin, o.lmax, o.points);
  const auto fit = estimate::fit_alpha(tail, o.lmax, g.dim());
  out << "alpha_hat: " << format_real(fit.estimate) << "\nb: " << format_real(fit.scale)
      << "\npoints: " << fit.points_used << "\nresidual_sse: " << format_real(fit.residual_sse) << '\n';
  if (!o.out.empty()) {
    const fs::path path = o.out;
    auto f = open_output(path);
    f << "length,tail,model\n";
    const double k = static_cast<double>(g.dim()) * (fit.estimate - 1.0);
    for (const auto& p : tail) {
      const double model = fit.scale * (std::pow(p.length, -k) - std::pow(o.lmax, -k));
      f << format_real(p.length) << ',' << format_real(p.tail) << ',' << format_real(model) << '\n';
    }
    close_output(f, path);
    Manifest m{"estimate-alpha", argv};
    m.inputs = {graph_path};
    m.outputs = {path};
    m.parameters = {{"lmin", o.lmin}, {"lmax", o.lmax}, {"points", o.points}};
    write_manifest(default_manifest(path, o.manifest), m);
  }
  return 0;
}

std::map<std::size_t, spread::EpidemicCurve> read_curves(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("run,count,time", 0) != 0) {
    throw IoError(path.string() + ": expected header run,count,time");
  }
  std::map<std::size_t, spread::EpidemicCurve> curves;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
    try {
      auto& curve = curves[std::stoull(a)];
      curve.counts.push_back(std::stoull(b));
      curve.times.push_back(std::stod(c));
      curve.total = curve.counts.back();
    } catch (const std::exception&) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
  }
  if (curves.empty()) throw IoError(path.string() + ": no curve rows");
  return curves;
}

int cmd_fit_curve(const Opts& o, const std::vector<std::string>& argv, std::ostream& out) {
  estimate::FitMethod mode;
  if (o.mode == "loglog") {
    mode = estimate::FitMethod::LogLog;
  } else if (o.mode == "loglinear") {
    mode = estimate::FitMethod::LogLinear;
  } else {
    throw ValidationError("--mode must be 'loglog' or 'loglinear'");
  }
  const fs::path curves_path = o.curves;
  const auto curves = read_curves(curves_path);
  const double lo = std::pow(10.0, o.ilow), hi = std::pow(10.0, o.ihigh);

  // Median curve over the counts shared by every run.
  spread::EpidemicCurve median;
  {
    std::map<std::uint64_t, std::vector<double>> by_count;
    for (const auto& [r, c] : curves)
      for (std::size_t i = 0; i < c.counts.size(); ++i) by_count[c.counts[i]].push_back(c.times[i]);
    for (auto& [count, ts] : by_count) {
      if (ts.size() != curves.size()) continue;
      median.counts.push_back(count);
      median.times.push_back(spread::quantile(ts, 0.5));
    }
    median.total = median.counts.empty() ? 0 : median.counts.back();
  }

  std::ostringstream rows;
  rows << "run,slope,intercept,r2,points\n";
  std::vector<double> slopes;
  for (const auto& [r, c] : curves) {
    const auto fit = estimate::fit_growth_exponent(c, lo, hi, mode);
    slopes.push_back(fit.estimate);
    rows << r << ',' << format_real(fit.estimate) << ',' << format_real(fit.scale) << ','
         << format_real(fit.r2) << ',' << fit.points_used << '\n';
  }
  const auto med_fit = estimate::fit_growth_exponent(median, lo, hi, mode);
  rows << "median," << format_real(med_fit.estimate) << ',' << format_real(med_fit.scale) << ','
       << format_real(med_fit.r2) << ',' << med_fit.points_used << '\n';

  out << "mode: " << o.mode << "\nruns: " << curves.size()
      << "\nmedian_of_slopes: " << format_real(spread::quantile(slopes, 0.5))
      << "\nmedian_curve_slope: " << format_real(med_fit.estimate) << "\nmedian_curve_r2: " << format_real(med_fit.r2)
      << '\n';
  try {
    const auto cc = estimate::concavity_check(median, lo, hi, mode);
    out << "shape: " << estimate::shape_name(cc.verdict) << "\nshape_p_value: " << format_real(cc.p_value) << '\n';
  } catch (const EstimationError& e) {
    out << "shape: unavailable (" << e.what() << ")\n";
  }
  if (!o.out.empty()) {
    const fs::path path = o.out;
    auto f = open_output(path);
    f << rows.str();
    close_output(f, path);
    Manifest m{"fit-curve", argv};
    m.inputs = {curves_path};
    m.outputs = {path};
    m.parameters = {{"ilow", o.ilow}, {"ihigh", o.ihigh}, {"mode", o.mode}};
    write_manifest(default_manifest(path, o.manifest), m);
  }
  return 0;
}

int cmd_rewire(const Opts& o, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  const fs::path graph_path = o.graph, path = o.out;
  const auto g = load_graph(graph_path);
  const auto r = rewire::switch_rewire(g, o.sweeps, o.seed);
  if (!r.warning.empty()) err << "warning: " << r.warning << '\n';
  save_graph(path, r.graph);
  const auto d = rewire::mixing_diagnostic(g, r.graph);
  Manifest m{"rewire", argv};
  m.seeds["seed"] = o.seed;
  m.parameters = {{"sweeps", o.sweeps}, {"pairing", "(u,u'),(v,v')"}};
  m.inputs = {graph_path};
  m.outputs = {path};
  write_manifest(default_manifest(path, o.manifest), m);
  out << "proposals: " << r.proposals << "\naccepted: " << r.accepted
      << "\nedge_jaccard: " << format_real(d.edge_jaccard) << "\nmean_len_ratio: " << format_real(d.mean_len_ratio)
      << "\ndegree_seq_equal: " << (d.degree_seq_equal ? "true" : "false") << '\n';
  return 0;
}

int cmd_ingest(const Opts& o, const std::vector<std::string>& argv, std::ostream& out) {
  const fs::path edges = o.edges, checkins = o.checkins, path = o.out;
  const auto gw = gowalla::build_gowalla_graph(edges, checkins, o.tie_seed);
  save_graph(path, gw.graph);
  Manifest m{"ingest-gowalla", argv};
  m.seeds["tie_seed"] = o.tie_seed;
  m.inputs = {edges, checkins};
  m.outputs = {path};
  if (!o.idmap.empty()) {
    make_parent(o.idmap);
    gowalla::write_idmap(o.idmap, gw.user_of);
    m.outputs.emplace_back(o.idmap);
  }
  const auto lcc = largest_component(gw.graph);
  if (!o.lcc_out.empty()) {
    save_graph(o.lcc_out, lcc.graph);
    m.outputs.emplace_back(o.lcc_out);
  }
  write_manifest(default_manifest(path, o.manifest), m);
  auto mean = [](const SpatialGraph& g) {
    return g.num_nodes() ? 2.0 * static_cast<double>(g.num_edges()) / static_cast<double>(g.num_nodes()) : 0.0;
  };
  out << "nodes: " << gw.graph.num_nodes() << "\nedges: " << gw.graph.num_edges()
      << "\nmean_degree: " << format_real(mean(gw.graph)) << "\nlcc_nodes: " << lcc.graph.num_nodes()
      << "\nlcc_edges: " << lcc.graph.num_edges() << "\nlcc_mean_degree: " << format_real(mean(lcc.graph))
      << "\ndropped_edges: " << gw.dropped_edges << "\nmalformed_rows: " << gw.malformed_rows << '\n';
  return 0;
}

int cmd_edge_tail(const Opts& o, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  theory::EdgeTailParams p;
  p.d = o.d;
  p.tau = o.tau;
  p.alpha = alpha_of(o);
  p.c = o.c;
  p.weight_cap = o.weight_cap;
  const auto pred = theory::edge_tail_theory(o.l1, o.l2, p);
  if (pred.below_floor) err << "warning: L1 is below the range where the asymptotics apply\n";
  out << "regime: " << theory::regime_name(pred.regime) << '\n';
  auto line = [&](const char* k, const std::optional<double>& v) {
    if (v) out << k << ": " << format_real(*v) << '\n';
  };
  line("c1", pred.c1);
  line("c2", pred.c2);
  line("c3", pred.c3);
  line("c4", pred.c4);
  out << "predicted: " << format_real(pred.predicted) << "\npredicted_undirected: "
      << format_real(pred.predicted_undirected) << '\n';
  line("predicted_capped", pred.predicted_capped);

  std::vector<double> lengths;
  double n = 0.0;
  Manifest m{"edge-tail", argv};
  if (!o.graph.empty()) {
    const fs::path graph_path = o.graph;
    const auto g = load_graph(graph_path);
    m.inputs = {graph_path};
    n = static_cast<double>(g.num_nodes());
    for (const auto& e : g.edges()) lengths.push_back(e.length);
    std::sort(lengths.begin(), lengths.end());
    const auto count = std::upper_bound(lengths.begin(), lengths.end(), o.l2) -
                       std::lower_bound(lengths.begin(), lengths.end(), o.l1);
    const double emp = static_cast<double>(count) / n;
    out << "empirical_undirected: " << format_real(emp)
        << "\nratio: " << format_real(emp / pred.predicted_undirected) << '\n';
  }
  if (!o.out.empty()) {
    const fs::path path = o.out;
    auto f = open_output(path);
    f << "length,theory" << (lengths.empty() ? "" : ",empirical") << '\n';
    for (double l : estimate::log_grid(o.l1, o.l2, o.points)) {
      const double th = l < o.l2 ? theory::edge_tail_theory(l, o.l2, p).predicted_undirected : 0.0;
      f << format_real(l) << ',' << format_real(th);
      if (!lengths.empty()) {
        const auto count = std::upper_bound(lengths.begin(), lengths.end(), o.l2) -
                           std::lower_bound(lengths.begin(), lengths.end(), l);
        f << ',' << format_real(static_cast<double>(count) / n);
      }
      f << '\n';
    }
    close_output(f, path);
    m.outputs = {path};
    m.parameters = {{"d", p.d}, {"tau", p.tau}, {"alpha", o.alpha}, {"c", p.c}, {"l1", o.l1}, {"l2", o.l2}};
    write_manifest(default_manifest(path, o.manifest), m);
  }
  return 0;
}

int cmd_replay(const Opts& o, std::ostream& out, std::ostream& err) {
  std::ifstream in(o.replay_manifest);
  if (!in) throw IoError("cannot open " + o.replay_manifest);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(o.replay_manifest + ": not valid JSON: " + e.what());
  }
  if (!j.contains("argv") || !j["argv"].is_array()) throw ValidationError("manifest has no argv array");
  if (!o.no_verify && j.contains("inputs")) {
    for (const auto& input : j["inputs"]) {
      const std::string p = input.at("path");
      const std::string want = input.at("fnv1a64");
      const std::string have = hex64(fnv1a64_file(p));
      if (have != want) throw ValidationError("input " + p + " changed: checksum " + have + ", manifest " + want);
    }
  }
  const auto argv = j["argv"].get<std::vector<std::string>>();
  if (!argv.empty() && argv.front() == "replay") throw ValidationError("manifest records a replay");
  return run(argv, out, err);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatial epidemic spreading on geometric random graphs", "spreadlab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("spreadlab ") + kVersion);
  Opts o;
  o.threads = default_threads();

  auto model = [&](CLI::App* s, bool penalties) {
    s->add_option("--d", o.d, "dimension")->capture_default_str();
    s->add_option("--tau", o.tau, "power-law exponent")->capture_default_str();
    s->add_option("--alpha", o.alpha, "long-range parameter (inf for threshold)")->capture_default_str();
    if (penalties) {
      s->add_option("--mu", o.mu, "sender penalty exponent")->capture_default_str();
      s->add_option("--nu", o.nu, "receiver penalty exponent (defaults to mu)");
      s->add_option("--zeta", o.zeta, "edge-length penalty exponent")->capture_default_str();
    }
  };
  auto manifest_flag = [&](CLI::App* s) {
    s->add_option("--manifest", o.manifest, "manifest path (default: manifest.json next to the output)");
  };

  auto* sample = app.add_subcommand("sample", "sample a GIRG");
  model(sample, false);
  sample->add_option("--n", o.n, "expected number of nodes")->required();
  sample->add_option("--c", o.c, "edge probability constant")->capture_default_str();
  sample->add_option("--seed", o.seed, "master seed")->required();
  sample->add_option("--threads", o.threads, "worker threads");
  sample->add_flag("--naive", o.naive, "use the quadratic reference sampler");
  sample->add_option("--out", o.out, "output .sgraph")->required();
  manifest_flag(sample);

  auto* simulate = app.add_subcommand("simulate", "run first-passage epidemics");
  simulate->add_option("--graph", o.graph, "input .sgraph")->required();
  simulate->add_option("--mu", o.mu, "sender penalty exponent")->capture_default_str();
  simulate->add_option("--nu", o.nu, "receiver penalty exponent (defaults to mu)");
  simulate->add_option("--zeta", o.zeta, "edge-length penalty exponent")->capture_default_str();
  simulate->add_option("--beta", o.beta, "transmission rate")->capture_default_str();
  simulate->add_option("--base", o.base, "penalty base: weight | degree")->required();
  simulate->add_option("--runs", o.runs, "number of epidemics")->capture_default_str();
  simulate->add_option("--seed", o.seed, "master seed")->required();
  simulate->add_option("--source", o.source, "source node id");
  simulate->add_option("--source-xy", o.source_xy, "source = node nearest to x,y");
  simulate->add_option("--source-latlon", o.source_latlon, "source = node nearest to lat,lon");
  simulate->add_option("--heatmap-boxes", o.heatmap_boxes, "boxes per side of grid.csv (0 = none)")->capture_default_str();
  simulate->add_option("--crop", o.crop, "heatmap crop x0,y0,x1,y1");
  simulate->add_option("--max-reached", o.max_reached, "stop each run after this many infections");
  simulate->add_flag("--no-times", o.no_times, "skip times.csv");
  simulate->add_option("--threads", o.threads, "worker threads");
  simulate->add_option("--out-dir", o.out_dir, "output directory")->required();
  manifest_flag(simulate);

  auto* classify = app.add_subcommand("classify", "growth phase of a parameter point");
  model(classify, true);
  classify->add_flag("--json", o.json_out, "print JSON");

  auto* diagram = app.add_subcommand("phase-diagram", "classify a grid of parameter points");
  model(diagram, true);
  diagram->add_option("--x", o.x_axis, "name:lo:hi:steps")->capture_default_str();
  diagram->add_option("--y", o.y_axis, "name:lo:hi:steps")->capture_default_str();
  diagram->add_option("--out", o.out, "output pd.csv")->required();
  manifest_flag(diagram);

  auto* etau = app.add_subcommand("estimate-tau", "Hill estimate of the degree exponent");
  etau->add_option("--graph", o.graph, "input .sgraph")->required();
  etau->add_option("--out", o.out, "Hill plot CSV");
  manifest_flag(etau);

  auto* ealpha = app.add_subcommand("estimate-alpha", "truncated-tail fit of the edge-length exponent");
  ealpha->add_option("--graph", o.graph, "input .sgraph")->required();
  ealpha->add_option("--lmin", o.lmin, "window lower end L-")->capture_default_str();
  ealpha->add_option("--lmax", o.lmax, "window upper end L+")->capture_default_str();
  ealpha->add_flag("--km", o.km, "lengths in km (haversine graphs)");
  ealpha->add_option("--points", o.points, "grid points")->capture_default_str();
  ealpha->add_option("--out", o.out, "tail CSV");
  manifest_flag(ealpha);

  auto* fit = app.add_subcommand("fit-curve", "growth exponent of epidemic curves");
  fit->add_option("--curves", o.curves, "curves.csv")->required();
  fit->add_option("--ilow", o.ilow, "log10 of the window start")->capture_default_str();
  fit->add_option("--ihigh", o.ihigh, "log10 of the window end")->capture_default_str();
  fit->add_option("--mode", o.mode, "loglog | loglinear")->capture_default_str();
  fit->add_option("--out", o.out, "fits CSV");
  manifest_flag(fit);

  auto* rw = app.add_subcommand("rewire", "degree-preserving switch-chain randomisation");
  rw->add_option("--graph", o.graph, "input .sgraph")->required();
  rw->add_option("--sweeps", o.sweeps, "proposals per edge")->capture_default_str();
  rw->add_option("--seed", o.seed, "chain seed")->required();
  rw->add_option("--out", o.out, "output .sgraph")->required();
  manifest_flag(rw);

  auto* ingest = app.add_subcommand("ingest-gowalla", "build the located friendship graph");
  ingest->add_option("--edges", o.edges, "SNAP edge list")->required();
  ingest->add_option("--checkins", o.checkins, "SNAP check-ins")->required();
  ingest->add_option("--tie-seed", o.tie_seed, "seed for home-location ties")->required();
  ingest->add_option("--out", o.out, "output .sgraph")->required();
  ingest->add_option("--idmap", o.idmap, "node to user TSV");
  ingest->add_option("--lcc-out", o.lcc_out, "largest component .sgraph");
  manifest_flag(ingest);

  auto* tail = app.add_subcommand("edge-tail", "asymptotic edge-length counts");
  model(tail, false);
  tail->add_option("--c", o.c, "edge probability constant")->capture_default_str();
  tail->add_option("--l1", o.l1, "lower length")->capture_default_str();
  tail->add_option("--l2", o.l2, "upper length (inf allowed)")->capture_default_str();
  tail->add_option("--weight-cap", o.weight_cap, "weight cap M");
  tail->add_option("--graph", o.graph, "compare with this graph");
  tail->add_option("--points", o.points, "CSV grid points")->capture_default_str();
  tail->add_option("--out", o.out, "CSV of theory (and empirical) counts");
  manifest_flag(tail);

  auto* replay = app.add_subcommand("replay", "rerun the command recorded in a manifest");
  replay->add_option("--manifest", o.replay_manifest, "manifest.json")->required();
  replay->add_flag("--no-verify", o.no_verify, "skip input checksum verification");

  std::vector<std::string> storage{"spreadlab"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> cargv;
  for (const auto& s : storage) cargv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sample) return cmd_sample(o, args, out);
    if (*simulate) return cmd_simulate(o, args, out);
    if (*classify) return cmd_classify(o, out);
    if (*diagram) return cmd_phase_diagram(o, args, out);
    if (*etau) return cmd_estimate_tau(o, args, out);
    if (*ealpha) return cmd_estimate_alpha(o, args, out);
    if (*fit) return cmd_fit_curve(o, args, out);
    if (*rw) return cmd_rewire(o, args, out, err);
    if (*ingest) return cmd_ingest(o, args, out);
    if (*tail) return cmd_edge_tail(o, args, out, err);
    if (*replay) return cmd_replay(o, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace spreadlab::cli
