#include "eegraph/montage.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "eegraph/errors.hpp"

namespace eegraph {

namespace {

constexpr double kPi = 3.14159265358979323846;

double norm3(double x, double y, double z) {
  return std::sqrt(x * x + y * y + z * z);
}

struct Vec3 {
  double x, y, z;
};

Vec3 normalize(Vec3 v) {
  const double n = norm3(v.x, v.y, v.z);
  return {v.x / n, v.y / n, v.z / n};
}

/// Great-circle interpolation between unit vectors.
Vec3 slerp(Vec3 a, Vec3 b, double t) {
  double dot = a.x * b.x + a.y * b.y + a.z * b.z;
  dot = std::clamp(dot, -1.0, 1.0);
  const double omega = std::acos(dot);
  if (omega < 1e-12) return a;
  const double sa = std::sin((1.0 - t) * omega) / std::sin(omega);
  const double sb = std::sin(t * omega) / std::sin(omega);
  return normalize(
      {sa * a.x + sb * b.x, sa * a.y + sb * b.y, sa * a.z + sb * b.z});
}

/// Midline electrode at fraction p of the nasion-to-inion arc.
Vec3 midline(double p) {
  const double a = p * kPi;
  return {0.0, std::cos(a), std::sin(a)};
}

/// Outer-ring electrode at `azimuth_deg` from the nasion along the 10% ring
/// (elevation 18 degrees); positive azimuth runs over the left hemisphere.
Vec3 ring(double azimuth_deg) {
  const double e = 18.0 * kPi / 180.0;
  const double a = azimuth_deg * kPi / 180.0;
  return {-std::cos(e) * std::sin(a), std::cos(e) * std::cos(a), std::sin(e)};
}

Vec3 mirror(Vec3 v) { return {-v.x, v.y, v.z}; }

void push(std::vector<Electrode>& out, const std::string& name, Vec3 v) {
  out.push_back({name, v.x, v.y, v.z});
}

/// One 10-10 row: ring electrode through the midline electrode, interior
/// positions at quarter fractions of the arc. `cols` picks which of the
/// left-side labels {row}7/{row}5/{row}3/{row}1 exist, mirrored on the right.
void push_row(std::vector<Electrode>& out, const std::string& row,
              Vec3 ring_left, Vec3 mid, const std::vector<int>& cols,
              bool include_midline) {
  const std::map<int, double> frac = {{7, 0.0}, {5, 0.25}, {3, 0.5}, {1, 0.75}};
  for (int c : cols)
    push(out, row + std::to_string(c), slerp(ring_left, mid, frac.at(c)));
  if (include_midline) push(out, row + "z", mid);
  for (auto it = cols.rbegin(); it != cols.rend(); ++it)
    push(out, row + std::to_string(*it + 1),
         mirror(slerp(ring_left, mid, frac.at(*it))));
}

}  // namespace

Montage::Montage(std::vector<Electrode> electrodes)
    : electrodes_(std::move(electrodes)) {
  std::set<std::string> names;
  for (const auto& e : electrodes_) {
    if (!names.insert(e.name).second)
      throw DataError("montage: duplicate electrode name '" + e.name + "'");
    const double n = norm3(e.x, e.y, e.z);
    if (std::fabs(n - 1.0) > 1e-6)
      throw DataError("montage: electrode '" + e.name + "' has norm " +
                      std::to_string(n) + ", expected 1 (unit sphere)");
  }
}

Montage load_montage(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open montage file: " + path);
  std::vector<Electrode> electrodes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name)) continue;  // blank or comment-only line
    double x, y, z;
    if (!(ls >> x >> y >> z))
      throw DataError("malformed montage line " + std::to_string(lineno) +
                      " in " + path);
    electrodes.push_back({name, x, y, z});
  }
  if (electrodes.empty()) throw DataError("montage file is empty: " + path);
  return Montage(std::move(electrodes));
}

void save_montage(const Montage& m, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot open montage file for writing: " + path);
  os << "# idealized 10-5 unit-sphere coordinates: name x y z\n";
  os.precision(17);
  for (const auto& e : m.electrodes())
    os << e.name << " " << e.x << " " << e.y << " " << e.z << "\n";
  if (!os) throw DataError("short write to montage file: " + path);
}

Montage reference_montage_errp56() {
  std::vector<Electrode> out;
  // outer ring, front to back
  push(out, "Fp1", ring(18));
  push(out, "Fp2", mirror(ring(18)));
  push(out, "AF7", ring(36));
  push(out, "AF3", slerp(ring(36), midline(0.2), 0.5));
  push(out, "AF4", mirror(slerp(ring(36), midline(0.2), 0.5)));
  push(out, "AF8", mirror(ring(36)));
  push_row(out, "F", ring(54), midline(0.3), {7, 5, 3, 1}, true);
  // frontocentral row runs FT7 .. FC1 FCz
  {
    const Vec3 ft7 = ring(72), fcz = midline(0.4);
    push(out, "FT7", ft7);
    push(out, "FC5", slerp(ft7, fcz, 0.25));
    push(out, "FC3", slerp(ft7, fcz, 0.5));
    push(out, "FC1", slerp(ft7, fcz, 0.75));
    push(out, "FCz", fcz);
    push(out, "FC2", mirror(slerp(ft7, fcz, 0.75)));
    push(out, "FC4", mirror(slerp(ft7, fcz, 0.5)));
    push(out, "FC6", mirror(slerp(ft7, fcz, 0.25)));
    push(out, "FT8", mirror(ft7));
  }
  {
    const Vec3 t7 = ring(90), cz = midline(0.5);
    push(out, "T7", t7);
    push(out, "C5", slerp(t7, cz, 0.25));
    push(out, "C3", slerp(t7, cz, 0.5));
    push(out, "C1", slerp(t7, cz, 0.75));
    push(out, "Cz", cz);
    push(out, "C2", mirror(slerp(t7, cz, 0.75)));
    push(out, "C4", mirror(slerp(t7, cz, 0.5)));
    push(out, "C6", mirror(slerp(t7, cz, 0.25)));
    push(out, "T8", mirror(t7));
  }
  {
    const Vec3 tp7 = ring(108), cpz = midline(0.6);
    push(out, "TP7", tp7);
    push(out, "CP5", slerp(tp7, cpz, 0.25));
    push(out, "CP3", slerp(tp7, cpz, 0.5));
    push(out, "CP1", slerp(tp7, cpz, 0.75));
    push(out, "CPz", cpz);
    push(out, "CP2", mirror(slerp(tp7, cpz, 0.75)));
    push(out, "CP4", mirror(slerp(tp7, cpz, 0.5)));
    push(out, "CP6", mirror(slerp(tp7, cpz, 0.25)));
    push(out, "TP8", mirror(tp7));
  }
  push_row(out, "P", ring(126), midline(0.7), {7, 5, 3, 1}, true);
  push(out, "PO7", ring(144));
  push(out, "POz", midline(0.8));
  push(out, "PO8", mirror(ring(144)));
  push(out, "O1", ring(162));
  push(out, "O2", mirror(ring(162)));
  return Montage(std::move(out));
}

Montage reference_montage_rsvp16() {
  std::vector<Electrode> out;
  push(out, "Fp1", ring(18));
  push(out, "Fp2", mirror(ring(18)));
  push(out, "F7", ring(54));
  push(out, "F3", slerp(ring(54), midline(0.3), 0.5));
  push(out, "Fz", midline(0.3));
  push(out, "F4", mirror(slerp(ring(54), midline(0.3), 0.5)));
  push(out, "F8", mirror(ring(54)));
  push(out, "T7", ring(90));
  push(out, "C3", slerp(ring(90), midline(0.5), 0.5));
  push(out, "Cz", midline(0.5));
  push(out, "C4", mirror(slerp(ring(90), midline(0.5), 0.5)));
  push(out, "T8", mirror(ring(90)));
  push(out, "P3", slerp(ring(126), midline(0.7), 0.5));
  push(out, "Pz", midline(0.7));
  push(out, "P4", mirror(slerp(ring(126), midline(0.7), 0.5)));
  push(out, "Oz", midline(0.9));
  return Montage(std::move(out));
}

Montage resolve_montage(const std::string& name_or_path) {
  if (name_or_path == "errp56") return reference_montage_errp56();
  if (name_or_path == "rsvp16") return reference_montage_rsvp16();
  return load_montage(name_or_path);
}

EdgePolicy EdgePolicy::complete(bool self_loops) {
  return {Kind::Complete, 1, 0.0, self_loops};
}
EdgePolicy EdgePolicy::knng(std::size_t k, bool self_loops) {
  if (k < 1) throw std::invalid_argument("knng: k must be >= 1");
  return {Kind::Knng, k, 0.0, self_loops};
}
EdgePolicy EdgePolicy::distance_threshold(double d, bool self_loops) {
  if (!(d >= 0.0))
    throw std::invalid_argument("distance threshold: d must be >= 0");
  return {Kind::DistanceThreshold, 1, d, self_loops};
}

EdgePolicy parse_edge_policy(const std::string& text) {
  std::string body = text;
  bool self_loops = false;
  const std::string suffix = ",self-loops";
  if (body.size() > suffix.size() &&
      body.compare(body.size() - suffix.size(), suffix.size(), suffix) == 0) {
    self_loops = true;
    body.erase(body.size() - suffix.size());
  }
  if (body == "complete") return EdgePolicy::complete(self_loops);
  if (body.rfind("knng:k=", 0) == 0) {
    const std::string num = body.substr(7);
    std::size_t pos = 0;
    unsigned long k = 0;
    try {
      k = std::stoul(num, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != num.size() || k < 1)
      throw std::invalid_argument("bad edge policy '" + text +
                                  "': k must be a positive integer");
    return EdgePolicy::knng(k, self_loops);
  }
  if (body.rfind("dist:d=", 0) == 0) {
    const std::string num = body.substr(7);
    std::size_t pos = 0;
    double d = 0.0;
    try {
      d = std::stod(num, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != num.size() || !(d >= 0.0))
      throw std::invalid_argument("bad edge policy '" + text +
                                  "': d must be a non-negative number");
    return EdgePolicy::distance_threshold(d, self_loops);
  }
  throw std::invalid_argument(
      "bad edge policy '" + text +
      "' (expected complete, knng:k=K or dist:d=D, optionally ,self-loops)");
}

std::string to_string(const EdgePolicy& p) {
  std::ostringstream os;
  switch (p.kind) {
    case EdgePolicy::Kind::Complete: os << "complete"; break;
    case EdgePolicy::Kind::Knng: os << "knng:k=" << p.k; break;
    case EdgePolicy::Kind::DistanceThreshold:
      os << "dist:d=" << p.d;
      break;
  }
  if (p.self_loops) os << ",self-loops";
  return os.str();
}

Tensor pairwise_distances(const Montage& m) {
  const std::size_t n = m.size();
  Tensor d = Tensor::zeros({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = m.at(i);
      const auto& b = m.at(j);
      const double dist = norm3(a.x - b.x, a.y - b.y, a.z - b.z);
      d.data()[i * n + j] = dist;
      d.data()[j * n + i] = dist;
    }
  return d;
}

Graph build_graph(const Montage& m, const EdgePolicy& p) {
  const std::size_t n = m.size();
  if (n == 0) throw std::invalid_argument("build_graph: empty montage");
  const Tensor dist = pairwise_distances(m);

  // undirected pair set (i < j)
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  switch (p.kind) {
    case EdgePolicy::Kind::Complete:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.insert({i, j});
      break;
    case EdgePolicy::Kind::Knng: {
      if (p.k >= n)
        throw std::invalid_argument("knng: k=" + std::to_string(p.k) +
                                    " must be < node count " +
                                    std::to_string(n));
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> others;
        for (std::size_t j = 0; j < n; ++j)
          if (j != i) others.push_back(j);
        std::stable_sort(others.begin(), others.end(),
                         [&](std::size_t a, std::size_t b) {
                           const double da = dist.at(i, a), db = dist.at(i, b);
                           if (da != db) return da < db;
                           return a < b;  // ties to the lower index
                         });
        for (std::size_t r = 0; r < p.k; ++r) {
          const std::size_t j = others[r];
          pairs.insert({std::min(i, j), std::max(i, j)});
        }
      }
      break;
    }
    case EdgePolicy::Kind::DistanceThreshold:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (dist.at(i, j) < p.d) pairs.insert({i, j});
      break;
  }

  std::vector<Edge> edges;
  for (const auto& [i, j] : pairs) {
    edges.push_back({i, j, 1.0});
    edges.push_back({j, i, 1.0});
  }
  if (p.self_loops)
    for (std::size_t i = 0; i < n; ++i) edges.push_back({i, i, 1.0});
  return Graph(n, std::move(edges), true);
}

}  // namespace eegraph
