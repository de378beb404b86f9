#include "tailbound/numeric.hpp"

#include <algorithm>
#include <array>

namespace tailbound {

namespace {

double safe_eval(const std::function<double(double)>& objective, double x) {
  const double v = objective(x);
  return std::isnan(v) ? kInf : v;
}

struct SimpsonPanel {
  double a, m, b;
  double fa, fm, fb;
  double whole;
};

double simpson_recurse(const std::function<double(double)>& f, const SimpsonPanel& p,
                       double eps, int depth) {
  const double lm = 0.5 * (p.a + p.m);
  const double rm = 0.5 * (p.m + p.b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (p.m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
  const double right = (p.b - p.m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
  const double delta = left + right - p.whole;
  if (std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  if (depth <= 0) throw NumericError("adaptive Simpson quadrature did not converge");
  return simpson_recurse(f, {p.a, lm, p.m, p.fa, flm, p.fm, left}, 0.5 * eps, depth - 1) +
         simpson_recurse(f, {p.m, rm, p.b, p.fm, frm, p.fb, right}, 0.5 * eps, depth - 1);
}

}  // namespace

Minimum golden_section(const std::function<double(double)>& objective, double lo,
                       double hi, double rel_width) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = safe_eval(objective, c);
  double fd = safe_eval(objective, d);
  for (int it = 0; it < 400; ++it) {
    if (b - a <= rel_width * 0.5 * (std::abs(a) + std::abs(b))) break;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = safe_eval(objective, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = safe_eval(objective, d);
    }
  }
  return fc <= fd ? Minimum{c, fc, false} : Minimum{d, fd, false};
}

Minimum minimize_positive(const std::function<double(double)>& objective,
                          const SearchOptions& opt) {
  const bool bounded = std::isfinite(opt.domain_sup);
  auto step_up = [&](double x) {
    return bounded ? std::min(2.0 * x, 0.5 * (x + opt.domain_sup)) : 2.0 * x;
  };
  auto at_top = [&](double x) {
    return x >= opt.cap || (bounded && opt.domain_sup - x <= 1e-14 * opt.domain_sup);
  };

  double x0 = bounded ? std::min(opt.start, 0.5 * opt.domain_sup) : opt.start;
  double f0 = safe_eval(objective, x0);
  double lo = 0.0, hi = 0.0;
  Minimum best{x0, f0, false};

  const double x_up = step_up(x0);
  const double f_up = safe_eval(objective, x_up);
  if (f_up < f0) {
    double prev = x0, cur = x_up, fcur = f_up;
    for (;;) {
      const double next = step_up(cur);
      if (at_top(cur) || next > opt.cap) return {cur, fcur, true};
      const double fnext = safe_eval(objective, next);
      if (fnext >= fcur) {
        lo = prev;
        hi = next;
        break;
      }
      prev = cur;
      cur = next;
      fcur = fnext;
    }
    best = {cur, fcur, false};
  } else {
    const double x_dn = 0.5 * x0;
    const double f_dn = safe_eval(objective, x_dn);
    if (f_dn < f0) {
      double prev = x0, cur = x_dn, fcur = f_dn;
      for (;;) {
        const double next = 0.5 * cur;
        if (next < opt.floor) return {cur, fcur, true};
        const double fnext = safe_eval(objective, next);
        if (fnext >= fcur) {
          lo = next;
          hi = prev;
          break;
        }
        prev = cur;
        cur = next;
        fcur = fnext;
      }
      best = {cur, fcur, false};
    } else {
      lo = x_dn;
      hi = x_up;
    }
  }

  if (!std::isfinite(best.value)) {
    throw NumericError("minimization bracket has no finite objective value");
  }
  const Minimum refined = golden_section(objective, lo, hi, opt.rel_width);
  return refined.value < best.value ? refined : best;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, int max_depth) {
  if (!(b > a)) return 0.0;
  constexpr int kPanels = 64;
  const double h = (b - a) / kPanels;
  std::array<double, 2 * kPanels + 1> fx{};
  for (int i = 0; i <= 2 * kPanels; ++i) fx[i] = f(a + 0.5 * h * i);

  std::array<double, kPanels> whole{};
  double coarse = 0.0, coarse_abs = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    whole[i] = h / 6.0 * (fx[2 * i] + 4.0 * fx[2 * i + 1] + fx[2 * i + 2]);
    coarse += whole[i];
    coarse_abs += std::abs(whole[i]);
  }
  const double eps =
      rel_tol * std::max(coarse_abs, std::numeric_limits<double>::min()) / kPanels;

  double total = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const double pa = a + h * i;
    SimpsonPanel p{pa, pa + 0.5 * h, pa + h, fx[2 * i], fx[2 * i + 1], fx[2 * i + 2], whole[i]};
    total += simpson_recurse(f, p, eps, max_depth);
  }
  return total;
}

}  // namespace tailbound
