#include "spreadlab/graph_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "spreadlab/error.hpp"

namespace spreadlab {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void parse_fail(const std::string& source, std::size_t line_no, const std::string& what) {
  throw IoError(source + ":" + std::to_string(line_no) + ": " + what);
}

double parse_double(std::string_view s, const std::string& source, std::size_t line_no) {
  double x = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    parse_fail(source, line_no, "bad number '" + std::string(s) + "'");
  }
  return x;
}

std::uint64_t parse_uint(std::string_view s, const std::string& source, std::size_t line_no) {
  std::uint64_t x = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    parse_fail(source, line_no, "bad integer '" + std::string(s) + "'");
  }
  return x;
}

}  // namespace

void write_sgraph(std::ostream& out, const SpatialGraph& g) {
  const Metric& m = g.metric();
  std::string param = "0";
  if (m.kind == MetricKind::TorusL2) {
    const bool uniform = std::all_of(m.side.begin(), m.side.end(), [&](double s) { return s == m.side[0]; });
    if (uniform) {
      param = format_real(m.side[0]);
    } else {
      param.clear();
      for (std::size_t k = 0; k < m.side.size(); ++k) {
        if (k) param += ',';
        param += format_real(m.side[k]);
      }
    }
  } else if (m.kind == MetricKind::Haversine) {
    param = format_real(m.radius_km);
  }
  out << "#sgraph 1 " << g.num_nodes() << ' ' << g.num_edges() << ' ' << g.dim() << ' '
      << metric_name(m.kind) << ' ' << param << '\n';
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    out << v;
    for (double x : g.position(v)) out << '\t' << format_real(x);
    out << '\t' << (g.has_weights() ? format_real(g.weight(v)) : std::string("NA")) << '\n';
  }
  for (const Edge& e : g.edges()) out << e.u << '\t' << e.v << '\n';
}

void write_sgraph(const std::filesystem::path& path, const SpatialGraph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_sgraph(out, g);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

SpatialGraph read_sgraph(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw IoError(source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::istringstream header(line);
  std::string magic, metric_token, param;
  int version = 0;
  std::uint64_t n = 0, m = 0, dim = 0;
  header >> magic >> version >> n >> m >> dim >> metric_token >> param;
  if (!header || magic != "#sgraph") parse_fail(source, line_no, "missing '#sgraph' header");
  if (version != 1) parse_fail(source, line_no, "unsupported sgraph version " + std::to_string(version));
  if (dim == 0) parse_fail(source, line_no, "dimension must be positive");

  Metric metric;
  try {
    metric.kind = parse_metric_name(metric_token);
  } catch (const ValidationError& e) {
    parse_fail(source, line_no, e.what());
  }
  if (metric.kind == MetricKind::TorusL2) {
    std::vector<double> sides;
    std::string_view rest(param);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      sides.push_back(parse_double(rest.substr(0, comma), source, line_no));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (sides.size() == 1) sides.assign(dim, sides[0]);
    metric.side = std::move(sides);
  } else if (metric.kind == MetricKind::Haversine) {
    metric.radius_km = parse_double(param, source, line_no);
  }

  std::vector<double> coords;
  coords.reserve(n * dim);
  std::vector<double> weights;
  weights.reserve(n);
  std::size_t missing_weights = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    ++line_no;
    if (!std::getline(in, line)) parse_fail(source, line_no, "unexpected end of node section");
    const auto fields = split_tabs(line);
    if (fields.size() != dim + 2) parse_fail(source, line_no, "expected id, " + std::to_string(dim) + " coordinates and weight");
    if (parse_uint(fields[0], source, line_no) != i) parse_fail(source, line_no, "node ids must be dense and in order");
    for (std::size_t k = 0; k < dim; ++k) coords.push_back(parse_double(fields[1 + k], source, line_no));
    if (fields.back() == "NA") {
      ++missing_weights;
      weights.push_back(1.0);
    } else {
      weights.push_back(parse_double(fields.back(), source, line_no));
    }
  }
  if (missing_weights == n) {
    weights.clear();
  } else if (missing_weights != 0) {
    parse_fail(source, line_no, "weights must be given for all nodes or for none");
  }

  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    ++line_no;
    if (!std::getline(in, line)) parse_fail(source, line_no, "unexpected end of edge section");
    const auto fields = split_tabs(line);
    if (fields.size() != 2) parse_fail(source, line_no, "expected 'u<TAB>v'");
    edges.emplace_back(static_cast<NodeId>(parse_uint(fields[0], source, line_no)),
                       static_cast<NodeId>(parse_uint(fields[1], source, line_no)));
  }
  try {
    return SpatialGraph(std::move(metric), dim, std::move(coords), std::move(weights), std::move(edges));
  } catch (const ValidationError& e) {
    throw IoError(source + ": " + e.what());
  }
}

SpatialGraph read_sgraph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_sgraph(in, path.string());
}

}  // namespace spreadlab
