// Acceptance checks. One PASS/FAIL line per criterion; exit status is nonzero
// if any criterion fails.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "quadkick/quadkick.hpp"

namespace {

using namespace quadkick;
namespace fs = std::filesystem;

constexpr double kPi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %2d %-28s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

PhysicalParams with_occupancy(double n) {
  PhysicalParams p;
  p.n_bar = n;
  return p;
}

void variance_reduction() {
  const PhysicalParams p;
  const double ratio = effective_stiffness(p.g, p.n_p, p.omega_m) / p.omega_m;
  const double n = 12.6;
  const auto out = propagate(thermal_state(n), kick_matrix(ratio * p.omega_m, p.omega_m,
                                                           optimal_kick_duration(ratio * p.omega_m, p.omega_m)));
  const double factor = (n + 0.5) / out.var_x();
  const bool ok = ratio == 21.0 && rel(factor, 21.0) <= 1e-12 && std::abs(factor - 20.0) / 20.0 <= 0.05;
  report(1, "variance reduction factor", ok, fmt("ratio=%.17g factor=%.17g", ratio, factor));
}

void two_pulse_sub_vacuum() {
  const PhysicalParams p = with_occupancy(138.0);
  const auto steps = apply_schedule(thermal_state(138.0), canonical_protocol(p, 2, false), p);
  const double var_x = steps.back().state.var_x();
  const int pulses = min_pulses(p).pulses;
  const bool ok = rel(var_x, 138.5 / 441.0) <= 1e-12 && var_x < 0.5 && pulses == 2;
  report(2, "two-pulse sub-vacuum", ok, fmt("var_x=%.17g pulses=%d", var_x, pulses));
}

void occupancy() {
  const double cold = thermal_occupancy(1e-4, 1e6);
  const double mk = thermal_occupancy(1e-3, 1e6);
  const double ref = oracle::thermal_occupancy(oracle::Big("1e-3"), oracle::Big("1e6"));
  const bool ok = cold >= 12.0 && cold <= 13.5 && mk >= 125.0 && mk <= 140.0 && rel(mk, ref) <= 1e-3;
  report(3, "thermal occupancy", ok, fmt("n(0.1mK)=%.6f n(1mK)=%.6f reference=%.6f", cold, mk, ref));
}

void decoherence() {
  const double temps[] = {1.0, 1e-3, 1e-4};
  const double quoted[] = {4e-2, 4e-5, 4e-6};
  bool ok = true;
  std::string detail;
  for (int i = 0; i < 3; ++i) {
    const double d = decoherence_term(0.1, kPi * 1e-6, thermal_occupancy(temps[i], 1e6));
    const double r = d / quoted[i];
    ok = ok && r <= 1.1 && r >= 1.0 / 1.1;
    detail += fmt("%.4g ", d);
  }
  report(4, "decoherence terms", ok, detail);
}

void coupling() {
  PhysicalParams p;
  p.R = 0.4;
  const double g = coupling_from_physical(p);
  report(5, "coupling from physical", g >= 0.9e-4 && g <= 1.2e-4, fmt("g=%.6e", g));
}

void symplectic_suite() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_kick = 0.0, worst_free = 0.0, worst_prop = 0.0, min_det = 1.0;
  const int cases = 2000;
  for (int i = 0; i < cases; ++i) {
    const double omega = std::pow(10.0, 4.0 + 4.0 * u(rng));
    const double g_eff = omega * (1.0 + std::pow(10.0, 3.0 * u(rng)));
    const double t = 4.0 * kPi / std::sqrt(g_eff * omega) * u(rng);
    const double tau = 4.0 * kPi / omega * u(rng);
    const auto k = kick_matrix(g_eff, omega, t);
    const auto f = free_matrix(omega, tau);
    worst_kick = std::max(worst_kick, std::abs(k.det() - 1.0));
    worst_free = std::max(worst_free, std::abs(f.det() - 1.0));

    const GaussianState s({}, 0.5 + 100.0 * u(rng), 0.5 + 100.0 * u(rng), 0.0);
    worst_prop = std::max(worst_prop, rel(propagate(propagate(s, k), f).det(), s.det()));
  }

  // Random schedules from vacuum. Stiffness ratio and length are bounded so that
  // var_p * var_x stays well inside what double precision can resolve at 1e-9.
  for (int i = 0; i < cases; ++i) {
    const double omega = std::pow(10.0, 4.0 + 4.0 * u(rng));
    const double g_eff = omega * (1.0 + 99.0 * u(rng));
    PhysicalParams p;
    p.omega_m = omega;
    p.g = (g_eff - omega) / (2.0 * p.n_p);
    p.n_bar = 0.0;
    const double t_opt = optimal_kick_duration(g_eff, omega);
    PulseSchedule sched;
    const int len = 1 + static_cast<int>(6 * u(rng));
    for (int j = 0; j < len; ++j) {
      if (u(rng) < 0.5) sched.segments.push_back(Kick{2.0 * t_opt * u(rng)});
      else sched.segments.push_back(Free{2.0 * kPi / omega * u(rng)});
    }
    min_det = std::min(min_det, apply_schedule(GaussianState::vacuum(), sched, p).back().state.det());
  }
  const bool ok = worst_kick <= 1e-12 && worst_free <= 1e-12 && worst_prop <= 1e-9 && min_det >= 0.25 - 1e-9;
  report(6, "symplectic property suite", ok,
         fmt("cases=%d |detK-1|=%.2e |detF-1|=%.2e det drift=%.2e min det-1/4=%.2e", cases, worst_kick, worst_free,
             worst_prop, min_det - 0.25));
}

void closed_form_vs_composition() {
  const PhysicalParams p = with_occupancy(12.6);
  const double g_eff = effective_stiffness(p.g, p.n_p, p.omega_m);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double tau = 2.0 * kPi / p.omega_m * i / 99.0;
    PulseSchedule s;
    const double t_opt = optimal_kick_duration(g_eff, p.omega_m);
    s.segments = {Kick{t_opt}, Free{tau}, Kick{t_opt}};
    const auto state = apply_schedule(thermal_state(12.6), s, p).back().state;
    const auto closed = two_pulse_variance(tau, g_eff, p.omega_m, 12.6);
    worst = std::max({worst, rel(closed.var_x, state.var_x()), rel(closed.var_p, state.var_p())});
  }
  report(7, "closed form vs composition", worst <= 1e-12, fmt("worst relative difference=%.2e", worst));
}

double spectral_distance(const GaussianState& s, double n_env) {
  const double a = s.var_p() - (n_env + 0.5);
  const double b = s.var_x() - (n_env + 0.5);
  const double mid = 0.5 * (a + b);
  const double rad = std::hypot(0.5 * (a - b), s.cross());
  return std::max(std::abs(mid + rad), std::abs(mid - rad));
}

void channel_fixed_point() {
  const double n_env = 130.42;
  GaussianState s({3.0, -1.0}, 441.0 * 138.5, 138.5 / 441.0, 5.0);
  for (int i = 0; i < 10; ++i) s = dissipate(s, 0.1, 50.0, n_env);  // gamma * tau = 5 per step
  const double dist = spectral_distance(s, n_env);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const GaussianState x({u(rng), -u(rng)}, 0.3 + 10 * u(rng), 1.0, 0.1);
    const double gamma = u(rng), t1 = u(rng), t2 = u(rng), n = 10 * u(rng);
    const auto two = dissipate(dissipate(x, gamma, t1, n), gamma, t2, n);
    const auto one = dissipate(x, gamma, t1 + t2, n);
    worst = std::max({worst, rel(two.var_p(), one.var_p()), rel(two.var_x(), one.var_x()),
                      rel(two.cross(), one.cross())});
  }
  report(8, "channel fixed point", dist < 1e-9 && worst <= 1e-12,
         fmt("distance after gamma*tau=50: %.2e, semigroup worst=%.2e", dist, worst));
}

void readout_magnitude() {
  bool ok = true;
  std::string detail;
  for (double x2 : {0.5, 13.5, 138.5}) {
    ReadoutConfig cfg;
    cfg.kappa = 1e7;
    cfg.g = 1e-4;
    cfg.t_end = 60.0 / cfg.kappa;
    cfg.dt = max_readout_step(cfg.kappa, 0.0);
    const auto trace = integrate_langevin(cfg, [&](double) { return x2; });
    const double frac = std::abs(trace.shift.back() / trace.baseline);
    const double expected = 2.0 * cfg.g / cfg.kappa * x2;
    ok = ok && rel(frac, expected) <= 0.01;
    detail += fmt("x2=%g err=%.1e ", x2, rel(frac, expected));
  }
  // Fractional shifts are ~1e-11 here, so the round trip is carried out in 50-digit arithmetic.
  using Big = oracle::Big;
  const Big g("1e-4"), kappa("1e7"), i0("1e-4");
  double worst = 0.0;
  for (double v = 1e-2; v <= 1e3; v *= 1.5) {
    const Big back = infer_x2<Big>(adiabatic_intensity<Big>(Big(v), i0, g, kappa), i0, g, kappa);
    worst = std::max(worst, rel(static_cast<double>(back), v));
  }
  ok = ok && worst <= 1e-12;
  report(9, "readout magnitude", ok, detail + fmt("round-trip worst=%.1e", worst));
}

void adiabatic_validity() {
  const GaussianState squeezed({}, 275.1, 0.624, 0.0);
  const double kappas[] = {5e6, 1e7, 5e7, 1e8};
  std::vector<double> ratio, tracking;
  std::string detail;
  for (double kappa : kappas) {
    const auto r = ripple_report(make_readout_config(kappa, 1e-4, 1e6), squeezed, 1e6);
    ratio.push_back(r.ripple_amplitude / std::abs(r.dc_shift));
    tracking.push_back(r.ripple_amplitude / r.adiabatic_ripple);
    detail += fmt("k=%.0e ripple/dc=%.6f tracking=%.6f; ", kappa, ratio.back(), tracking.back());
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < ratio.size(); ++i) decreasing = decreasing && ratio[i] < ratio[i - 1];
  report(10, "adiabatic validity", decreasing, detail);
}

int run(const std::string& args) {
  const std::string cmd = std::string(QUADKICK_CLI) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism() {
  const fs::path dir = fs::path(QUADKICK_TEST_WORKDIR) / "acceptance_runs";
  fs::create_directories(dir);
  const fs::path sim = dir / "sim.csv";
  run("simulate --out " + sim.string());
  const std::vector<std::string> commands{
      "constants",
      "constants --format json",
      "simulate --schedule 'kick;free;kick;free;kick' --dissipation on",
      "simulate --format json",
      "readout --from " + sim.string(),
      "readout --var-p 13.5 --var-x 13.5 --format json",
      "sweep --axis T=1,1e-3,1e-4 --observable decoherence_term",
      "sweep --axis n_p=1e10,1e11 --axis T=1e-4,1 --observable pulses_needed --format json",
      "sweep --jitter=-0.01,0,0.01",
  };
  int identical = 0;
  std::string first_bad;
  for (const auto& c : commands) {
    const int a = run(c + " --out " + (dir / "a.out").string());
    const int b = run(c + " --out " + (dir / "b.out").string());
    if (a == 0 && b == 0 && slurp(dir / "a.out") == slurp(dir / "b.out")) ++identical;
    else if (first_bad.empty()) first_bad = c;
  }
  const bool ok = identical == static_cast<int>(commands.size());
  report(11, "determinism", ok,
         fmt("%d/%zu commands byte-identical%s%s", identical, commands.size(), ok ? "" : ", first mismatch: ",
             first_bad.c_str()));
}

}  // namespace

int main() {
  variance_reduction();
  two_pulse_sub_vacuum();
  occupancy();
  decoherence();
  coupling();
  symplectic_suite();
  closed_form_vs_composition();
  channel_fixed_point();
  readout_magnitude();
  adiabatic_validity();
  determinism();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
