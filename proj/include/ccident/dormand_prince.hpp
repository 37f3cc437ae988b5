// Adaptive Dormand-Prince 5(4) integrator with Hairer's PI step control and
// 4th-order continuous extension.

#ifndef CCIDENT_DORMAND_PRINCE_HPP
#define CCIDENT_DORMAND_PRINCE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ccident {

namespace dp5 {
// Butcher tableau.
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0,
                        c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0,
                        a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                        a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                        a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                        a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0,
                        a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                        a76 = 11.0 / 84.0;
// Difference between the 5th and embedded 4th order weights.
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                        e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                        e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Dense output.
inline constexpr double d1 = -12715105075.0 / 11282082432.0,
                        d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0,
                        d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0,
                        d7 = 69997945.0 / 29380423.0;
}  // namespace dp5

struct StepControl {
  double rtol = 1e-10;
  double atol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-12;
  long max_steps = 100'000'000;
};

enum class StepOutcome { Finished, StepUnderflow, NonFinite, TooManySteps };

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_calls = 0;
};

/// Result of a run; `t_fail` holds the time at which integration stopped
/// when `outcome != Finished`.
struct SolveResult {
  StepOutcome outcome = StepOutcome::Finished;
  double t_fail = 0.0;
  StepStats stats;
};

/// Integrates y' = rhs(t, y) from t0 to t1 and reports the solution at the
/// ascending abscissae `t_out` through `sink(i, y_i)`, using the continuous
/// extension of each accepted step. `t_out` must lie inside [t0, t1].
template <typename Scalar, int N, typename Rhs, typename Sink>
SolveResult dormand_prince(Rhs&& rhs, Scalar t0, Scalar t1,
                           const Eigen::Matrix<Scalar, N, 1>& y0,
                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& t_out,
                           Sink&& sink, const StepControl& ctl) {
  using Vec = Eigen::Matrix<Scalar, N, 1>;
  using std::abs;
  using std::max;
  using std::min;
  using std::pow;
  using std::sqrt;
  using namespace dp5;

  constexpr Scalar safe = 0.9, fac1 = 0.2, fac2 = 10.0, beta = 0.04;
  const Scalar expo1 = Scalar(0.2) - beta * Scalar(0.75);
  const Scalar facc1 = 1 / fac1, facc2 = 1 / fac2;
  const Eigen::Index n = y0.size();

  SolveResult res;
  Vec y = y0, y1(n), ysti(n), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  Vec r1(n), r2(n), r3(n), r4(n), r5(n);

  auto f = [&](Scalar t, const Vec& s, Vec& out) {
    rhs(t, s, out);
    ++res.stats.rhs_calls;
  };

  Eigen::Index next_out = 0;
  const Eigen::Index n_out = t_out.size();
  while (next_out < n_out && t_out[next_out] <= t0) {
    sink(next_out, y0);
    ++next_out;
  }

  Scalar t = t0;
  const Scalar span = t1 - t0;
  const Scalar hmax = min<Scalar>(ctl.max_step, abs(span));
  f(t, y, k1);

  auto scale = [&](const Vec& a, const Vec& b) {
    return (ctl.atol + ctl.rtol * a.cwiseAbs().cwiseMax(b.cwiseAbs()).array())
        .matrix();
  };

  // Initial step guess (Hairer & Wanner, hinit).
  Scalar h;
  {
    Vec sk = scale(y, y);
    Scalar dnf = (k1.array() / sk.array()).square().sum() / n;
    Scalar dny = (y.array() / sk.array()).square().sum() / n;
    h = (dnf <= 1e-10 || dny <= 1e-10) ? Scalar(1e-6)
                                         : sqrt(dny / dnf) * Scalar(0.01);
    h = min(h, hmax);
    Vec y_e = y + h * k1;
    f(t + h, y_e, k2);
    Scalar der2 = sqrt(((k2 - k1).array() / sk.array()).square().sum() / n) / h;
    Scalar der12 = max(der2, sqrt(dnf));
    Scalar h1 = der12 <= 1e-15 ? max<Scalar>(1e-6, abs(h) * 1e-3)
                               : pow(Scalar(0.01) / der12, Scalar(0.2));
    h = min({Scalar(100) * abs(h), h1, hmax});
  }

  Scalar facold = 1e-4;
  bool reject = false;
  bool last = false;

  while (true) {
    if (res.stats.accepted + res.stats.rejected >= ctl.max_steps) {
      res.outcome = StepOutcome::TooManySteps;
      res.t_fail = t;
      return res;
    }
    if (h < ctl.min_step && !last) {
      res.outcome = StepOutcome::StepUnderflow;
      res.t_fail = t;
      return res;
    }
    if (t + Scalar(1.01) * h >= t1) {
      h = t1 - t;
      last = true;
    }

    ysti = y + h * a21 * k1;
    f(t + c2 * h, ysti, k2);
    ysti = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, ysti, k3);
    ysti = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, ysti, k4);
    ysti = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, ysti, k5);
    ysti = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    const Scalar tph = t + h;
    f(tph, ysti, k6);
    y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    f(tph, y1, k7);

    if (!y1.allFinite() || !k7.allFinite()) {
      // Treat as a rejected step first; persistent blow-up ends up here
      // again with a shrinking step.
      if (h * facc2 < ctl.min_step || !y.allFinite()) {
        res.outcome = StepOutcome::NonFinite;
        res.t_fail = t;
        return res;
      }
      ++res.stats.rejected;
      h *= facc2;
      reject = true;
      last = false;
      continue;
    }

    Vec err_v = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    Vec sk = scale(y, y1);
    Scalar err = sqrt((err_v.array() / sk.array()).square().sum() / n);
    if (!std::isfinite(err)) err = Scalar(1e10);

    Scalar fac11 = pow(err, expo1);
    Scalar fac = fac11 / pow(facold, beta);
    fac = max(facc2, min(facc1, fac / safe));
    Scalar hnew = h / fac;

    if (err <= 1) {
      facold = max<Scalar>(err, 1e-4);
      ++res.stats.accepted;

      if (next_out < n_out && t_out[next_out] <= tph) {
        Vec ydiff = y1 - y;
        Vec bspl = h * k1 - ydiff;
        r1 = y;
        r2 = ydiff;
        r3 = bspl;
        r4 = ydiff - h * k7 - bspl;
        r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        while (next_out < n_out && t_out[next_out] <= tph) {
          if (last && next_out == n_out - 1 && t_out[next_out] >= t1) {
            sink(next_out, y1);
          } else {
            const Scalar theta = (t_out[next_out] - t) / h;
            const Scalar theta1 = 1 - theta;
            Vec yo = r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
            sink(next_out, yo);
          }
          ++next_out;
        }
      }

      k1 = k7;
      y = y1;
      t = tph;
      if (last) break;
      if (abs(hnew) > hmax) hnew = hmax;
      if (reject) hnew = min(abs(hnew), abs(h));
      reject = false;
    } else {
      hnew = h / min(facc1, fac11 / safe);
      reject = true;
      last = false;
      ++res.stats.rejected;
    }
    h = hnew;
  }
  // Any abscissa beyond t1 by rounding gets the final state.
  while (next_out < n_out) {
    sink(next_out, y);
    ++next_out;
  }
  return res;
}

}  // namespace ccident

#endif  // CCIDENT_DORMAND_PRINCE_HPP
