#include "ccident/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ccident {

std::string_view family_name(ModelFamily f) {
  return f == ModelFamily::PositionFriction ? "position" : "velocity";
}

ModelFamily parse_family(std::string_view s) {
  if (s == "position" || s == "1") return ModelFamily::PositionFriction;
  if (s == "velocity" || s == "2") return ModelFamily::VelocityFriction;
  throw std::invalid_argument("unknown model family '" + std::string(s) +
                              "' (expected position|velocity)");
}

std::string_view curve_kind_name(CurveKind k) {
  switch (k) {
    case CurveKind::Polynomial: return "polynomial";
    case CurveKind::SparsePolynomial: return "sparse-polynomial";
    case CurveKind::Neural: return "neural";
    case CurveKind::Analytic: return "analytic";
  }
  return "?";
}

std::vector<std::string> validate_dataset(const Dataset& ds) {
  std::vector<std::string> out;
  const Eigen::Index n = ds.t.size();
  const std::pair<const char*, const Eigen::VectorXd*> cols[] = {
      {"t", &ds.t}, {"x", &ds.x}, {"xdot", &ds.xdot},
      {"xddot", &ds.xddot}, {"fext", &ds.fext}};

  if (n < 2) out.push_back("t has fewer than 2 samples @ 0");
  for (const auto& [name, col] : cols) {
    if (col->size() != n) {
      out.push_back(std::string(name) + " length " +
                    std::to_string(col->size()) + " != " + std::to_string(n) +
                    " @ 0");
      continue;
    }
    for (Eigen::Index i = 0; i < n; ++i)
      if (!std::isfinite((*col)[i]))
        out.push_back(std::string(name) + " non-finite @ " + std::to_string(i));
  }
  if (n >= 2) {
    for (Eigen::Index i = 1; i < n; ++i)
      if (!(ds.t[i] > ds.t[i - 1]))
        out.push_back("t not strictly increasing @ " + std::to_string(i));
    if (out.empty()) {
      const double h = ds.step();
      const double tol = 1e-9 * std::max(1.0, std::abs(ds.t[n - 1]));
      for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(ds.t[i] - (ds.t[0] + double(i) * h)) > tol) {
          out.push_back("t not uniform @ " + std::to_string(i));
          break;
        }
      }
    }
  }
  return out;
}

void require_valid(const Dataset& ds) {
  auto v = validate_dataset(ds);
  if (v.empty()) return;
  std::string msg = "invalid dataset:";
  const std::size_t shown = std::min<std::size_t>(v.size(), 5);
  for (std::size_t i = 0; i < shown; ++i) msg += " [" + v[i] + "]";
  if (v.size() > shown) msg += " (+" + std::to_string(v.size() - shown) + " more)";
  throw InvalidData(msg);
}

Eigen::VectorXd uniform_grid(double t0, double tf, Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("uniform_grid: n must be >= 2");
  Eigen::VectorXd g(n);
  const double h = (tf - t0) / double(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) g[i] = t0 + double(i) * h;
  g[n - 1] = tf;
  return g;
}

Eigen::VectorXd resample_uniform(const Eigen::Ref<const Eigen::VectorXd>& t_raw,
                                 const Eigen::Ref<const Eigen::VectorXd>& y_raw,
                                 Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("resample_uniform: n must be >= 2");
  const Eigen::Index m = t_raw.size();
  if (m < 2 || y_raw.size() != m)
    throw std::invalid_argument("resample_uniform: need >= 2 matching samples");
  for (Eigen::Index i = 1; i < m; ++i)
    if (!(t_raw[i] > t_raw[i - 1]))
      throw std::invalid_argument("resample_uniform: t_raw not strictly increasing");

  const Eigen::VectorXd grid = uniform_grid(t_raw[0], t_raw[m - 1], n);
  Eigen::VectorXd out(n);
  Eigen::Index seg = 0;  // t_raw[seg] <= tq < t_raw[seg + 1]
  for (Eigen::Index q = 0; q < n; ++q) {
    const double tq = grid[q];
    while (seg + 2 < m && t_raw[seg + 1] <= tq) ++seg;
    if (tq == t_raw[seg]) { out[q] = y_raw[seg]; continue; }
    if (tq == t_raw[seg + 1]) { out[q] = y_raw[seg + 1]; continue; }
    if (m < 4) {
      // Fewer than four nodes: Lagrange through all of them.
      double acc = 0;
      for (Eigen::Index j = 0; j < m; ++j) {
        double w = 1;
        for (Eigen::Index k = 0; k < m; ++k)
          if (k != j) w *= (tq - t_raw[k]) / (t_raw[j] - t_raw[k]);
        acc += w * y_raw[j];
      }
      out[q] = acc;
      continue;
    }
    // Four-node stencil centred on the bracketing interval.
    const Eigen::Index lo = std::clamp<Eigen::Index>(seg - 1, 0, m - 4);
    double acc = 0;
    for (Eigen::Index j = lo; j < lo + 4; ++j) {
      double w = 1;
      for (Eigen::Index k = lo; k < lo + 4; ++k)
        if (k != j) w *= (tq - t_raw[k]) / (t_raw[j] - t_raw[k]);
      acc += w * y_raw[j];
    }
    out[q] = acc;
  }
  return out;
}

namespace {

Eigen::VectorXd moving_average(const Eigen::Ref<const Eigen::VectorXd>& x,
                               int window) {
  if (window <= 1) return x;
  const Eigen::Index n = x.size();
  const Eigen::Index half = window / 2;
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // Shrink symmetrically near the edges so the average stays centred.
    const Eigen::Index r = std::min({half, i, n - 1 - i});
    out[i] = x.segment(i - r, 2 * r + 1).mean();
  }
  return out;
}

}  // namespace

Derivatives estimate_derivatives(const Eigen::Ref<const Eigen::VectorXd>& t,
                                 const Eigen::Ref<const Eigen::VectorXd>& x,
                                 int smoothing) {
  const Eigen::Index n = x.size();
  if (n < 5 || t.size() != n)
    throw std::invalid_argument(
        "estimate_derivatives: need at least 5 samples with matching t");
  const double h = (t[n - 1] - t[0]) / double(n - 1);
  const Eigen::VectorXd f = moving_average(x, smoothing);

  Derivatives d{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  const double h1 = 12.0 * h, h2 = 12.0 * h * h;
  for (Eigen::Index i = 2; i < n - 2; ++i) {
    d.xdot[i] = (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / h1;
    d.xddot[i] =
        (-f[i - 2] + 16 * f[i - 1] - 30 * f[i] + 16 * f[i + 1] - f[i + 2]) / h2;
  }
  auto edge = [&](Eigen::Index i, double s, Eigen::Index a) {
    // a: first of five consecutive samples, s = +1 forward, -1 backward.
    const double f0 = f[a], f1 = f[a + 1 * Eigen::Index(s)],
                 f2 = f[a + 2 * Eigen::Index(s)], f3 = f[a + 3 * Eigen::Index(s)],
                 f4 = f[a + 4 * Eigen::Index(s)];
    const Eigen::Index off = (i - a) * Eigen::Index(s);
    if (off == 0) {
      d.xdot[i] = s * (-25 * f0 + 48 * f1 - 36 * f2 + 16 * f3 - 3 * f4) / h1;
      d.xddot[i] = (35 * f0 - 104 * f1 + 114 * f2 - 56 * f3 + 11 * f4) / h2;
    } else {
      d.xdot[i] = s * (-3 * f0 - 10 * f1 + 18 * f2 - 6 * f3 + f4) / h1;
      d.xddot[i] = (11 * f0 - 20 * f1 + 6 * f2 + 4 * f3 - f4) / h2;
    }
  };
  edge(0, 1, 0);
  edge(1, 1, 0);
  edge(n - 1, -1, n - 1);
  edge(n - 2, -1, n - 1);
  return d;
}

Dataset with_estimated_derivatives(Dataset ds, int smoothing) {
  if (ds.xdot.size() == ds.size() && ds.xddot.size() == ds.size()) return ds;
  auto d = estimate_derivatives(ds.t, ds.x, smoothing);
  ds.xdot = std::move(d.xdot);
  ds.xddot = std::move(d.xddot);
  return ds;
}

CurveModel::CurveModel() : f_([](double) { return 0.0; }) {}

CurveModel::CurveModel(CurveKind kind, Variable input, Function f,
                       Domain domain, bool discontinuous)
    : kind_(kind),
      input_(input),
      f_(std::move(f)),
      domain_(domain),
      discontinuous_(discontinuous) {}

CurveModel CurveModel::analytic(Variable input, Function f, bool discontinuous) {
  return CurveModel(CurveKind::Analytic, input, std::move(f), {}, discontinuous);
}

CurveModel CurveModel::zero(Variable input) {
  return analytic(input, [](double) { return 0.0; });
}

CurveModel CurveModel::with_edge_lines(const EdgeLines& lines) const {
  if (!domain_.bounded())
    throw std::invalid_argument("edge extrapolation needs a bounded domain");
  CurveModel c = *this;
  c.extrapolation_ = Extrapolation::LinearEdges;
  c.edges_ = lines;
  return c;
}

double CurveModel::operator()(double z) const {
  if (extrapolation_ == Extrapolation::LinearEdges) {
    if (z < domain_.lo) return edges_.lo_slope * z + edges_.lo_intercept;
    if (z > domain_.hi) return edges_.hi_slope * z + edges_.hi_intercept;
  }
  return f_(z);
}

void IdentifiedModel::check() const {
  const Variable want_a = family == ModelFamily::PositionFriction
                              ? Variable::Position
                              : Variable::Velocity;
  if (cc_a.input() != want_a || cc_b.input() != Variable::Position)
    throw std::invalid_argument(
        "curve inputs do not match the " + std::string(family_name(family)) +
        " family");
}

double IdentifiedModel::internal_force(double x, double v) const {
  if (family == ModelFamily::PositionFriction) return cc_a(x) * v + cc_b(x);
  return cc_a(v) + cc_b(x);
}

double ForcingSpec::operator()(double t) const {
  switch (form) {
    case ForcingForm::Zero: return 0.0;
    case ForcingForm::HarmonicCos: return amplitude * std::cos(omega * t);
    case ForcingForm::FHNComposite:
      // -eps_b * A cos(wt) - d/dt[A cos(wt)]
      return -eps_b * amplitude * std::cos(omega * t) +
             amplitude * omega * std::sin(omega * t);
  }
  return 0.0;
}

Eigen::VectorXd residual(const Dataset& ds, const IdentifiedModel& model) {
  model.check();
  require_valid(ds);
  Eigen::VectorXd r(ds.size());
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    const double e =
        ds.xddot[i] + model.internal_force(ds.x[i], ds.xdot[i]) - ds.fext[i];
    r[i] = e * e;
  }
  return r;
}

void write_dataset_csv(std::ostream& os, const Dataset& ds) {
  os << "t,x,xdot,xddot,fext\n";
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < ds.size(); ++i)
    os << ds.t[i] << ',' << ds.x[i] << ',' << ds.xdot[i] << ','
       << ds.xddot[i] << ',' << ds.fext[i] << '\n';
}

void write_dataset_csv(const std::string& path, const Dataset& ds) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_dataset_csv(os, ds);
}

Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidData("dataset CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const std::vector<std::string> full = {"t", "x", "xdot", "xddot", "fext"};
  const std::vector<std::string> bare = {"t", "x", "fext"};
  const bool has_derivs = header == full;
  if (!has_derivs && header != bare)
    throw InvalidData("dataset CSV: header must be 't,x,xdot,xddot,fext' (got '" +
                      line + "')");

  std::vector<std::vector<double>> cols(header.size());
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= cols.size())
        throw InvalidData("dataset CSV: too many fields on line " +
                          std::to_string(row));
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cell.size())
        throw InvalidData("dataset CSV: bad number '" + cell + "' on line " +
                          std::to_string(row));
      cols[c++].push_back(v);
    }
    if (c != cols.size())
      throw InvalidData("dataset CSV: too few fields on line " +
                        std::to_string(row));
  }
  auto vec = [](const std::vector<double>& v) {
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
        v.data(), Eigen::Index(v.size())));
  };
  Dataset ds;
  ds.t = vec(cols[0]);
  ds.x = vec(cols[1]);
  if (has_derivs) {
    ds.xdot = vec(cols[2]);
    ds.xddot = vec(cols[3]);
    ds.fext = vec(cols[4]);
  } else {
    ds.fext = vec(cols[2]);
  }
  return ds;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_dataset_csv(is);
}

}  // namespace ccident
