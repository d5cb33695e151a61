#pragma once

namespace quadkick {

/**
 * One classical fourth-order Runge-Kutta step for dy/dt = f(t, y).
 *
 * Y needs vector-space arithmetic (y + h*k, k1 + 2*k2); std::complex and
 * scalar types qualify.
 */
template <class Y, class F>
Y rk4_step(F&& f, double t, const Y& y, double h) {
  const Y k1 = f(t, y);
  const Y k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
  const Y k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
  const Y k4 = f(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace quadkick
