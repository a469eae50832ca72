#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "cardio/model.hpp"
#include "cardio/parameters.hpp"
#include "cardio/state.hpp"

using namespace cardio;

namespace {
const ParameterSet kRef = reference_parameters();
}

TEST_CASE("valve law: geometric mean at dp = 0") {
  const double r0 = valve_resistance(0.0, kRef.R_min, kRef.R_max);
  CHECK(r0 == doctest::Approx(std::sqrt(kRef.R_min * kRef.R_max)).epsilon(1e-12));
  // with the reference leaflet resistances this is ~24.36 mmHg*s/mL
  CHECK(r0 == doctest::Approx(24.357).epsilon(1e-3));
}

TEST_CASE("valve law: fully open / fully closed asymptotes") {
  // Forward 20 mmHg: resistance is within a fraction of a percent of R_min.
  const double q_fwd = valve_flow(20.0, kRef.R_min, kRef.R_max);
  CHECK(q_fwd == doctest::Approx(20.0 / kRef.R_min).epsilon(5e-3));

  // Backward 20 mmHg: leakage is bounded by dp / R_max (up to the same
  // sub-percent transition correction).
  const double q_bwd = valve_flow(-20.0, kRef.R_min, kRef.R_max);
  CHECK(q_bwd < 0.0);
  CHECK(std::abs(q_bwd) == doctest::Approx(20.0 / kRef.R_max).epsilon(5e-3));

  CHECK(valve_resistance(-50.0, kRef.R_min, kRef.R_max) ==
        doctest::Approx(kRef.R_max).epsilon(5e-3));
}

TEST_CASE("valve law: flow monotone, resistance monotone decreasing") {
  double q_prev = -1e30, r_prev = 1e30;
  for (double dp = -30.0; dp <= 30.0; dp += 0.25) {
    const double q = valve_flow(dp, kRef.R_min, kRef.R_max);
    const double r = valve_resistance(dp, kRef.R_min, kRef.R_max);
    CHECK(q > q_prev);
    CHECK(r < r_prev);
    CHECK(r >= kRef.R_min);
    CHECK(r <= kRef.R_max);
    q_prev = q;
    r_prev = r;
  }
  CHECK(valve_flow(0.0, kRef.R_min, kRef.R_max) == 0.0);
}

TEST_CASE("activation: branch endpoints and range") {
  const double T = kRef.T_HB();
  const ChamberParams& lv = kRef.LV;  // tC = 0, so no wrap complications

  CHECK(activation(0.0, lv, T) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(activation(0.5 * lv.TC, lv, T) == doctest::Approx(0.5));
  CHECK(activation(lv.TC, lv, T) == doctest::Approx(1.0));
  CHECK(activation(lv.tR + 0.5 * lv.TR, lv, T) == doctest::Approx(0.5));
  CHECK(activation(lv.tR + lv.TR, lv, T) == doctest::Approx(0.0));
  CHECK(activation(0.5 * (lv.tR + lv.TR + T), lv, T) == 0.0);  // diastole

  for (double t = -2.0 * T; t <= 2.0 * T; t += T / 64) {
    const double a = activation(t, lv, T);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
}

TEST_CASE("activation: periodic and correct across the wrap (LA)") {
  const double T = kRef.T_HB();
  const ChamberParams& la = kRef.LA;  // contracts late in the beat

  // peak at tC + TC = 0.85 T, relaxation ramp reaches zero at 0.85 T + TR
  // only via the wrap into the next beat
  CHECK(activation(la.tC + la.TC, la, T) == doctest::Approx(1.0));
  const double mid_relax = la.tR + 0.5 * la.TR;  // > T: wraps
  CHECK(activation(mid_relax, la, T) ==
        doctest::Approx(activation(mid_relax - T, la, T)).epsilon(1e-12));
  for (double t = 0.0; t < T; t += T / 97) {
    CHECK(activation(t, la, T) == doctest::Approx(activation(t + T, la, T)));
    CHECK(activation(t, la, T) == doctest::Approx(activation(t - 3 * T, la, T)));
  }
}

TEST_CASE("chamber pressure is elastance times stressed volume") {
  const double T = kRef.T_HB();
  ChamberParams ch{};
  ch.EA = 2.5;
  ch.EB = 2.769;
  ch.VU = 10.0;
  ch.tC = 0.0;
  ch.TC = 0.3 * T;
  ch.tR = ch.TC;
  ch.TR = 0.4 * T;

  const double t_dias = 0.9 * T;  // activation = 0 there
  REQUIRE(activation(t_dias, ch, T) == 0.0);
  CHECK(chamber_pressure(60.0, t_dias, ch, T) == doctest::Approx(50.0 * 2.769));

  // at peak activation the active elastance adds in full
  CHECK(chamber_pressure(60.0, ch.TC, ch, T) ==
        doctest::Approx(50.0 * (2.769 + 2.5)));
  CHECK(elastance(ch.TC, ch, T) == doctest::Approx(ch.EB + ch.EA));
}

TEST_CASE("rhs conserves total stressed volume pointwise") {
  ModelRhs rhs(kRef);
  State x = default_initial_state(kRef);
  // nudge the state so we are not at any special point
  for (int i = 0; i < 14; ++i) x[i] *= 1.0 + 0.013 * (i + 1);

  State dx{};
  for (double t : {0.0, 0.11, 0.31, 0.52, 0.74}) {
    rhs(t, x, dx);
    const double dV = dx[iV_LA] + dx[iV_LV] + dx[iV_RA] + dx[iV_RV] +
                      kRef.AR_SYS.C * dx[ip_AR_SYS] +
                      kRef.C_SYS.C * dx[ip_C_SYS] +
                      kRef.VEN_SYS.C * dx[ip_VEN_SYS] +
                      kRef.AR_PUL.C * dx[ip_AR_PUL] +
                      (kRef.C_PUL.C + kRef.C_SH) * dx[ip_C_PUL] +
                      kRef.VEN_PUL.C * dx[ip_VEN_PUL];
    CHECK(std::abs(dV) < 1e-9 * conserved_volume(x, kRef));
  }
}

TEST_CASE("rhs component check against hand-evaluated formulas") {
  ModelRhs rhs(kRef);
  State x{};
  x[iV_LA] = 65.0;
  x[iV_LV] = 120.0;
  x[iV_RA] = 70.0;
  x[iV_RV] = 140.0;
  x[ip_AR_SYS] = 85.0;
  x[ip_C_SYS] = 70.0;
  x[ip_VEN_SYS] = 30.0;
  x[ip_AR_PUL] = 20.0;
  x[ip_C_PUL] = 14.0;
  x[ip_VEN_PUL] = 10.0;
  x[iQ_AR_SYS] = 80.0;
  x[iQ_VEN_SYS] = 60.0;
  x[iQ_AR_PUL] = 70.0;
  x[iQ_VEN_PUL] = 50.0;
  const double t = 0.2;

  State dx{};
  rhs(t, x, dx);

  const double p_LA = rhs.chamber_pressure_of(0, t, x[iV_LA]);
  const double p_LV = rhs.chamber_pressure_of(1, t, x[iV_LV]);
  const double Q_MV = rhs.flow_through_valve(p_LA - p_LV);

  // atrium fills from the pulmonary venous flow state and drains through
  // the mitral valve
  CHECK(dx[iV_LA] == doctest::Approx(x[iQ_VEN_PUL] - Q_MV).epsilon(1e-12));

  // systemic arterial inertial flow obeys L dQ/dt = p_up - p_down - R Q
  const double dQ_expected =
      (x[ip_AR_SYS] - x[ip_C_SYS] - kRef.AR_SYS.R * x[iQ_AR_SYS]) /
      kRef.AR_SYS.L;
  CHECK(dx[iQ_AR_SYS] == doctest::Approx(dQ_expected).epsilon(1e-12));

  // capillary pressure node: C dp/dt = Q_in - Q_out, Q_out = dp over R
  const double Q_out_csys = (x[ip_C_SYS] - x[ip_VEN_SYS]) / kRef.C_SYS.R;
  CHECK(dx[ip_C_SYS] ==
        doctest::Approx((x[iQ_AR_SYS] - Q_out_csys) / kRef.C_SYS.C)
            .epsilon(1e-12));

  // pulmonary capillary node mixes the oxygenated and shunt branches on a
  // combined compliance
  const double Q_cp = (x[ip_C_PUL] - x[ip_VEN_PUL]) / kRef.C_PUL.R;
  const double Q_sh = (x[ip_C_PUL] - x[ip_VEN_PUL]) / kRef.R_SH;
  CHECK(dx[ip_C_PUL] ==
        doctest::Approx((x[iQ_AR_PUL] - Q_cp - Q_sh) /
                        (kRef.C_PUL.C + kRef.C_SH))
            .epsilon(1e-12));
}

TEST_CASE("rhs rejects non-finite states") {
  ModelRhs rhs(kRef);
  State x = default_initial_state(kRef);
  State dx{};
  x[ip_AR_SYS] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(rhs(0.0, x, dx), std::domain_error);
}

TEST_CASE("default initial state: volume independent of compliances") {
  const State x0 = default_initial_state(kRef);
  const double v0 = conserved_volume(x0, kRef);
  CHECK(v0 > 3000.0);
  CHECK(v0 < 4200.0);

  ParameterSet p2 = kRef;
  p2.AR_SYS.C *= 2.0;
  p2.VEN_PUL.C *= 0.4;
  p2.C_SH *= 3.0;
  const double v2 = conserved_volume(default_initial_state(p2), p2);
  CHECK(v2 == doctest::Approx(v0).epsilon(1e-9));
}

TEST_CASE("parameter set validation") {
  ParameterSet p = kRef;
  CHECK_NOTHROW(p.validate());

  p.HR = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  p = kRef;
  p.R_min = p.R_max;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  p = kRef;
  p.LV.TR = p.T_HB();  // TC + TR would exceed the beat
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  p = kRef;
  p.C_PUL.C = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("calibratable accessors cover all 32 slots") {
  REQUIRE(calibratable_names().size() == 32);
  ParameterSet p = kRef;
  for (int id = 0; id < kNumCalibratable; ++id) {
    const double old = get_calibratable(p, id);
    CHECK(old > 0.0);
    set_calibratable(p, id, old * 1.25);
    CHECK(get_calibratable(p, id) == doctest::Approx(old * 1.25).epsilon(1e-15));
    set_calibratable(p, id, old);
    CHECK(param_index(param_name(id)) == id);
  }
  CHECK(param_index("EA_LV") == 3);
  CHECK(get_calibratable(kRef, 3) == doctest::Approx(2.7));
  CHECK(get_calibratable(kRef, param_index("R_max")) == doctest::Approx(94168.0));
  CHECK(param_index("no_such_parameter") == -1);
  CHECK_THROWS_AS(param_name(32), std::out_of_range);
}

TEST_CASE("activation timings scale with heart rate") {
  const ParameterSet p60 = reference_parameters(60.0);
  CHECK(p60.T_HB() == doctest::Approx(1.0));
  CHECK(p60.RV.TC == doctest::Approx(0.30));
  CHECK(p60.LA.tC == doctest::Approx(0.75));
  const ParameterSet p100 = reference_parameters(100.0);
  CHECK(p100.RV.TC == doctest::Approx(0.30 * 0.6));
  // non-timing parameters do not depend on HR
  CHECK(p100.AR_SYS.R == p60.AR_SYS.R);
}
