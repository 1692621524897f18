#pragma once

// Dormand-Prince 5(4) with Hairer's continuous extension, step clamping on
// requested output times and terminal events located on the dense output.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace vortexnav::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

struct Settings {
  double rtol = 1e-12;
  double atol = 1e-12;
  double h_init = 0.0;  // 0 selects the starting step automatically
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 5'000'000;
  double event_tol = 1e-12;
  bool observe_steps = true;
};

enum class Status { Completed, Event, StepUnderflow, StepLimit };

template <std::size_t N>
struct Solution {
  double t = 0.0;
  Vec<N> y{};
  Status status = Status::Completed;
  std::size_t steps = 0;
  std::size_t rejected = 0;
};

struct NoEvent {
  template <class Y>
  double operator()(double, const Y&) const { return 1.0; }
};

struct NoObserver {
  template <class Y>
  void operator()(double, const Y&) const {}
};

namespace detail {

struct Tableau {
  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                          a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

template <std::size_t N>
struct StepData {
  Vec<N> y1{};
  Vec<N> k7{};
  Vec<N> err{};
  Vec<N> k1{}, k3{}, k4{}, k5{}, k6{};
};

template <std::size_t N, class F>
void dp_step(F& f, double t, const Vec<N>& y, const Vec<N>& k1, double h, StepData<N>& s) {
  using T = Tableau;
  Vec<N> k2, tmp;
  s.k1 = k1;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * T::a21 * k1[i];
  f(t + T::c2 * h, tmp, k2);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (T::a31 * k1[i] + T::a32 * k2[i]);
  f(t + T::c3 * h, tmp, s.k3);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (T::a41 * k1[i] + T::a42 * k2[i] + T::a43 * s.k3[i]);
  f(t + T::c4 * h, tmp, s.k4);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (T::a51 * k1[i] + T::a52 * k2[i] + T::a53 * s.k3[i] + T::a54 * s.k4[i]);
  f(t + T::c5 * h, tmp, s.k5);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (T::a61 * k1[i] + T::a62 * k2[i] + T::a63 * s.k3[i] +
                         T::a64 * s.k4[i] + T::a65 * s.k5[i]);
  f(t + h, tmp, s.k6);
  for (std::size_t i = 0; i < N; ++i)
    s.y1[i] = y[i] + h * (T::a71 * k1[i] + T::a73 * s.k3[i] + T::a74 * s.k4[i] +
                          T::a75 * s.k5[i] + T::a76 * s.k6[i]);
  f(t + h, s.y1, s.k7);
  for (std::size_t i = 0; i < N; ++i)
    s.err[i] = h * (T::e1 * k1[i] + T::e3 * s.k3[i] + T::e4 * s.k4[i] + T::e5 * s.k5[i] +
                    T::e6 * s.k6[i] + T::e7 * s.k7[i]);
}

template <std::size_t N>
double error_norm(const Vec<N>& err, const Vec<N>& y0, const Vec<N>& y1, double rtol,
                  double atol) {
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sk = atol + rtol * std::max(std::fabs(y0[i]), std::fabs(y1[i]));
    const double q = err[i] / sk;
    acc += q * q;
  }
  const double e = std::sqrt(acc / static_cast<double>(N));
  return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
}

}  // namespace detail

// Continuous extension of one accepted step.
template <std::size_t N>
class DenseStep {
 public:
  DenseStep() = default;

  DenseStep(double t0, double h, const Vec<N>& y0, const detail::StepData<N>& s) : t0_(t0), h_(h) {
    using T = detail::Tableau;
    for (std::size_t i = 0; i < N; ++i) {
      const double ydiff = s.y1[i] - y0[i];
      const double bspl = h * s.k1[i] - ydiff;
      r1_[i] = y0[i];
      r2_[i] = ydiff;
      r3_[i] = bspl;
      r4_[i] = ydiff - h * s.k7[i] - bspl;
      r5_[i] = h * (T::d1 * s.k1[i] + T::d3 * s.k3[i] + T::d4 * s.k4[i] + T::d5 * s.k5[i] +
                    T::d6 * s.k6[i] + T::d7 * s.k7[i]);
    }
  }

  double t_begin() const { return t0_; }
  double t_end() const { return t0_ + h_; }

  Vec<N> operator()(double t) const {
    const double th = (t - t0_) / h_;
    const double th1 = 1.0 - th;
    Vec<N> y;
    for (std::size_t i = 0; i < N; ++i)
      y[i] = r1_[i] + th * (r2_[i] + th1 * (r3_[i] + th * (r4_[i] + th1 * r5_[i])));
    return y;
  }

 private:
  double t0_ = 0.0, h_ = 1.0;
  Vec<N> r1_{}, r2_{}, r3_{}, r4_{}, r5_{};
};

// One unchecked step of size h from (t, y); used to land exactly on a time
// strictly inside an accepted step.
template <std::size_t N, class F>
Vec<N> single_step(F&& f, double t, const Vec<N>& y, double h) {
  Vec<N> k1;
  f(t, y, k1);
  detail::StepData<N> s;
  dp_step<N>(f, t, y, k1, h, s);
  return s.y1;
}

template <std::size_t N, class F>
double initial_step(F& f, double t0, const Vec<N>& y0, const Vec<N>& f0, const Settings& st,
                    double span) {
  double d0 = 0.0, d1 = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sk = st.atol + st.rtol * std::fabs(y0[i]);
    d0 += (y0[i] / sk) * (y0[i] / sk);
    d1 += (f0[i] / sk) * (f0[i] / sk);
  }
  d0 = std::sqrt(d0 / N);
  d1 = std::sqrt(d1 / N);
  double h0 = (d0 < 1e-10 || d1 < 1e-10) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min({h0, st.h_max, span});
  Vec<N> y1, f1;
  for (std::size_t i = 0; i < N; ++i) y1[i] = y0[i] + h0 * f0[i];
  f(t0 + h0, y1, f1);
  double d2 = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sk = st.atol + st.rtol * std::fabs(y0[i]);
    d2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
  }
  d2 = std::sqrt(d2 / N) / h0;
  const double dm = std::max(d1, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
  double h = std::min({100.0 * h0, h1, st.h_max, span});
  if (!std::isfinite(h) || h <= 0.0) h = 1e-6;
  return h;
}

// Integrates y' = f(t, y) from t0 to t_end > t0.
//
// f(t, y, dy) writes the derivative into dy. The integration is terminated
// at the first time the event function g(t, y) becomes <= 0; that time is
// located on the dense output to within settings.event_tol and the state
// there is recomputed by an exact step from the last accepted point.
// The observer is called with the initial state, at every requested output
// time, after every accepted step when observe_steps is set, and with the
// terminal state, never twice for the same time.
template <std::size_t N, class F, class Event = NoEvent, class Observer = NoObserver>
Solution<N> integrate(F&& f, double t0, const Vec<N>& y0, double t_end, const Settings& st,
                      std::span<const double> outputs = {}, Event&& g = Event{},
                      Observer&& observe = Observer{}) {
  Solution<N> sol;
  sol.t = t0;
  sol.y = y0;
  double last_emitted = -std::numeric_limits<double>::infinity();
  auto emit = [&](double t, const Vec<N>& y) {
    if (t != last_emitted) {
      observe(t, y);
      last_emitted = t;
    }
  };
  emit(t0, y0);
  if (g(t0, y0) <= 0.0) {
    sol.status = Status::Event;
    return sol;
  }
  if (!(t_end > t0)) return sol;

  std::size_t next_out = 0;
  while (next_out < outputs.size() && outputs[next_out] <= t0) ++next_out;

  double t = t0;
  Vec<N> y = y0;
  Vec<N> k1;
  f(t, y, k1);
  double h_prop = st.h_init > 0.0 ? st.h_init : initial_step<N>(f, t, y, k1, st, t_end - t0);
  bool last_rejected = false;
  detail::StepData<N> s;

  while (true) {
    if (sol.steps >= st.max_steps) {
      sol.status = Status::StepLimit;
      break;
    }
    double target = t_end;
    bool hits_output = false;
    if (next_out < outputs.size() && outputs[next_out] < t_end) {
      target = outputs[next_out];
    }
    double h = std::min(h_prop, st.h_max);
    bool clamp = false;
    if (t + h >= target || target - (t + h) < 1e-12 * std::fabs(h)) {
      h = target - t;
      clamp = true;
      hits_output = target != t_end;
    }
    if (!(h > 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(t)))) {
      sol.status = Status::StepUnderflow;
      break;
    }
    detail::dp_step<N>(f, t, y, k1, h, s);
    const double err = detail::error_norm<N>(s.err, y, s.y1, st.rtol, st.atol);
    if (err <= 1.0) {
      ++sol.steps;
      const double t_new = clamp ? target : t + h;
      const double g_new = g(t_new, s.y1);
      if (g_new <= 0.0 || !std::isfinite(g_new)) {
        DenseStep<N> dense(t, t_new - t, y, s);
        double lo = t, hi = t_new;
        while (hi - lo > st.event_tol) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          if (g(mid, dense(mid)) <= 0.0) hi = mid; else lo = mid;
        }
        Vec<N> y_event = single_step<N>(f, t, y, hi - t);
        if (!(g(hi, y_event) <= 0.0)) {
          // the exact re-step may land just short of the surface
          hi = std::min(t_new, hi + st.event_tol);
          y_event = hi == t_new ? s.y1 : single_step<N>(f, t, y, hi - t);
        }
        sol.t = hi;
        sol.y = y_event;
        sol.status = Status::Event;
        emit(sol.t, sol.y);
        return sol;
      }
      const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2,
                                    last_rejected ? 1.0 : 10.0);
      t = t_new;
      y = s.y1;
      k1 = s.k7;
      last_rejected = false;
      if (hits_output) {
        ++next_out;
        while (next_out < outputs.size() && outputs[next_out] <= t) ++next_out;
        emit(t, y);
      } else if (st.observe_steps) {
        emit(t, y);
      }
      if (t >= t_end) {
        sol.status = Status::Completed;
        break;
      }
      h_prop = clamp ? std::max(h_prop, h * fac) : h * fac;
    } else {
      ++sol.rejected;
      last_rejected = true;
      const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.1;
      h_prop = h * fac;
    }
  }
  sol.t = t;
  sol.y = y;
  emit(t, y);
  return sol;
}

}  // namespace vortexnav::ode
