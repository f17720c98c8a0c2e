#include "fluct/quad.hpp"

#include <cmath>

namespace fluct {

namespace {

// Kronrod-15 abscissae/weights (positive half) and the embedded Gauss-7 weights.
const double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
const double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

double panel_gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double acc = kWgk[7] * f(c);
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    acc += kWgk[j] * (f(c - dx) + f(c + dx));
  }
  return acc * h;
}

double pass(const std::function<double(double)>& f, double a, double b, int panels) {
  const double w = (b - a) / panels;
  double acc = 0.0;
  for (int i = 0; i < panels; ++i) acc += panel_gk15(f, a + i * w, a + (i + 1) * w);
  return acc;
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double tol, int initial_panels, int max_doublings) {
  QuadResult r;
  if (a == b) { r.converged = true; return r; }
  int panels = initial_panels;
  double prev = pass(f, a, b, panels);
  for (int it = 0; it < max_doublings; ++it) {
    panels *= 2;
    const double cur = pass(f, a, b, panels);
    r.error_estimate = std::fabs(cur - prev);
    r.value = cur;
    r.panels = panels;
    if (r.error_estimate < tol) { r.converged = true; return r; }
    prev = cur;
  }
  return r;
}

const double kGL12Nodes[12] = {
    -0.981560634246719250690549090149, -0.904117256370474856678465866119,
    -0.769902674194304687036893833213, -0.587317954286617447296702418941,
    -0.367831498998180193752691536644, -0.125233408511468915472441369464,
    0.125233408511468915472441369464,  0.367831498998180193752691536644,
    0.587317954286617447296702418941,  0.769902674194304687036893833213,
    0.904117256370474856678465866119,  0.981560634246719250690549090149};
const double kGL12Weights[12] = {
    0.047175336386511827194615961485, 0.106939325995318430960254718194,
    0.160078328543346226334652529543, 0.203167426723065921749064455810,
    0.233492536538354808760849898925, 0.249147045813402785000562436043,
    0.249147045813402785000562436043, 0.233492536538354808760849898925,
    0.203167426723065921749064455810, 0.160078328543346226334652529543,
    0.106939325995318430960254718194, 0.047175336386511827194615961485};

}  // namespace fluct
