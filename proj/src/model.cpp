#include "cardio/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cardio {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kValveSlope = 100.0 * kPi;
}  // namespace

double activation(double t, const ChamberParams& ch, double T_HB) {
  double mc = std::fmod(t - ch.tC, T_HB);
  if (mc < 0.0) mc += T_HB;
  if (mc < ch.TC) return 0.5 * (1.0 - std::cos(kPi * mc / ch.TC));
  double mr = std::fmod(t - ch.tR, T_HB);
  if (mr < 0.0) mr += T_HB;
  if (mr < ch.TR) return 0.5 * (1.0 + std::cos(kPi * mr / ch.TR));
  return 0.0;
}

double elastance(double t, const ChamberParams& ch, double T_HB) {
  return ch.EB + ch.EA * activation(t, ch, T_HB);
}

double chamber_pressure(double V, double t, const ChamberParams& ch,
                        double T_HB) {
  return elastance(t, ch, T_HB) * (V - ch.VU);
}

double valve_resistance(double dp, double R_min, double R_max) {
  const double c = std::log(R_max / R_min) / kPi;
  return std::sqrt(R_min * R_max) * std::exp(c * std::atan(-kValveSlope * dp));
}

double valve_flow(double dp, double R_min, double R_max) {
  return dp / valve_resistance(dp, R_min, R_max);
}

ModelRhs::ModelRhs(const ParameterSet& p) {
  p.validate();
  T_ = p.T_HB();
  const ChamberParams* src[4] = {&p.LA, &p.LV, &p.RA, &p.RV};
  for (int c = 0; c < 4; ++c) {
    const ChamberParams& s = *src[c];
    ch_[c] = {s.EA, s.EB, s.VU, s.tC, s.TC, s.tR, s.TR,
              s.TC > 0.0 ? kPi / s.TC : 0.0, s.TR > 0.0 ? kPi / s.TR : 0.0};
  }
  c_ln_ = std::log(p.R_max / p.R_min) / kPi;
  inv_sqrt_rr_ = 1.0 / std::sqrt(p.R_min * p.R_max);
  R_AR_SYS_ = p.AR_SYS.R;
  R_VEN_SYS_ = p.VEN_SYS.R;
  R_AR_PUL_ = p.AR_PUL.R;
  R_VEN_PUL_ = p.VEN_PUL.R;
  inv_R_C_SYS_ = 1.0 / p.C_SYS.R;
  inv_R_C_PUL_ = 1.0 / p.C_PUL.R;
  inv_R_SH_ = 1.0 / p.R_SH;
  inv_C_AR_SYS_ = 1.0 / p.AR_SYS.C;
  inv_C_C_SYS_ = 1.0 / p.C_SYS.C;
  inv_C_VEN_SYS_ = 1.0 / p.VEN_SYS.C;
  inv_C_AR_PUL_ = 1.0 / p.AR_PUL.C;
  inv_C_PULCAP_ = 1.0 / (p.C_SH + p.C_PUL.C);
  inv_C_VEN_PUL_ = 1.0 / p.VEN_PUL.C;
  inv_L_AR_SYS_ = 1.0 / p.AR_SYS.L;
  inv_L_VEN_SYS_ = 1.0 / p.VEN_SYS.L;
  inv_L_AR_PUL_ = 1.0 / p.AR_PUL.L;
  inv_L_VEN_PUL_ = 1.0 / p.VEN_PUL.L;
}

double ModelRhs::chamber_activation(int c, double t) const {
  const Chamber& h = ch_[c];
  double m = std::fmod(t - h.tC, T_);
  if (m < 0.0) m += T_;
  if (m < h.TC) return 0.5 * (1.0 - std::cos(h.pi_over_TC * m));
  m = std::fmod(t - h.tR, T_);
  if (m < 0.0) m += T_;
  if (m < h.TR) return 0.5 * (1.0 + std::cos(h.pi_over_TR * m));
  return 0.0;
}

double ModelRhs::chamber_pressure_of(int c, double t, double V) const {
  const Chamber& h = ch_[c];
  return (h.EB + h.EA * chamber_activation(c, t)) * (V - h.VU);
}

double ModelRhs::flow_through_valve(double dp) const {
  return dp * inv_sqrt_rr_ * std::exp(c_ln_ * std::atan(kValveSlope * dp));
}

void ModelRhs::operator()(double t, const State& x, State& dx) const {
  for (int i = 0; i < 14; ++i) {
    if (!std::isfinite(x[i]))
      throw std::domain_error(std::string("ModelRhs: non-finite state component ") +
                              std::string(kStateNames[i]));
  }

  // One shared phase within the beat, then per-chamber window tests.
  double tau = std::fmod(t, T_);
  if (tau < 0.0) tau += T_;

  double pch[4];
  for (int c = 0; c < 4; ++c) {
    const Chamber& h = ch_[c];
    double m = tau - h.tC;
    if (m < 0.0) m += T_;
    double a;
    if (m < h.TC) {
      a = 0.5 * (1.0 - std::cos(h.pi_over_TC * m));
    } else {
      double mr = tau - h.tR;
      if (mr < 0.0) mr += T_;
      a = (mr < h.TR) ? 0.5 * (1.0 + std::cos(h.pi_over_TR * mr)) : 0.0;
    }
    pch[c] = (h.EB + h.EA * a) * (x[c] - h.VU);
  }
  const double pLA = pch[0], pLV = pch[1], pRA = pch[2], pRV = pch[3];

  const double pAS = x[ip_AR_SYS], pCS = x[ip_C_SYS], pVS = x[ip_VEN_SYS];
  const double pAP = x[ip_AR_PUL], pCP = x[ip_C_PUL], pVP = x[ip_VEN_PUL];
  const double QAS = x[iQ_AR_SYS], QVS = x[iQ_VEN_SYS];
  const double QAP = x[iQ_AR_PUL], QVP = x[iQ_VEN_PUL];

  const double QMV = flow_through_valve(pLA - pLV);
  const double QAV = flow_through_valve(pLV - pAS);
  const double QTV = flow_through_valve(pRA - pRV);
  const double QPV = flow_through_valve(pRV - pAP);

  const double QCS = (pCS - pVS) * inv_R_C_SYS_;
  const double QCP = (pCP - pVP) * inv_R_C_PUL_;
  const double QSH = (pCP - pVP) * inv_R_SH_;

  dx[iV_LA] = QVP - QMV;
  dx[iV_LV] = QMV - QAV;
  dx[iV_RA] = QVS - QTV;
  dx[iV_RV] = QTV - QPV;
  dx[ip_AR_SYS] = (QAV - QAS) * inv_C_AR_SYS_;
  dx[ip_C_SYS] = (QAS - QCS) * inv_C_C_SYS_;
  dx[ip_VEN_SYS] = (QCS - QVS) * inv_C_VEN_SYS_;
  dx[ip_AR_PUL] = (QPV - QAP) * inv_C_AR_PUL_;
  dx[ip_C_PUL] = (QAP - QSH - QCP) * inv_C_PULCAP_;
  dx[ip_VEN_PUL] = (QSH + QCP - QVP) * inv_C_VEN_PUL_;
  dx[iQ_AR_SYS] = (pAS - pCS - R_AR_SYS_ * QAS) * inv_L_AR_SYS_;
  dx[iQ_VEN_SYS] = (pVS - pRA - R_VEN_SYS_ * QVS) * inv_L_VEN_SYS_;
  dx[iQ_AR_PUL] = (pAP - pCP - R_AR_PUL_ * QAP) * inv_L_AR_PUL_;
  dx[iQ_VEN_PUL] = (pVP - pLA - R_VEN_PUL_ * QVP) * inv_L_VEN_PUL_;
}

double conserved_volume(const State& x, const ParameterSet& p) {
  return x[iV_LA] + x[iV_LV] + x[iV_RA] + x[iV_RV] +
         p.AR_SYS.C * x[ip_AR_SYS] + p.C_SYS.C * x[ip_C_SYS] +
         p.VEN_SYS.C * x[ip_VEN_SYS] + p.AR_PUL.C * x[ip_AR_PUL] +
         (p.C_SH + p.C_PUL.C) * x[ip_C_PUL] + p.VEN_PUL.C * x[ip_VEN_PUL];
}

State default_initial_state(const ParameterSet& p) {
  // Stressed volumes equal to reference compliance x typical mean pressure,
  // so the conserved total stays fixed when compliances are resampled.
  constexpr double V0_AR_SYS = 1.33 * 90.0;
  constexpr double V0_C_SYS = 0.28 * 40.0;
  constexpr double V0_VEN_SYS = 75.0 * 37.65;
  constexpr double V0_AR_PUL = 6.0 * 19.5;
  constexpr double V0_PULCAP = (0.049 + 5.78) * 13.4;
  constexpr double V0_VEN_PUL = 13.18 * 12.0;

  State x{};
  x[iV_LA] = p.LA.VU + 40.0;
  x[iV_LV] = p.LV.VU + 60.0;
  x[iV_RA] = p.RA.VU + 40.0;
  x[iV_RV] = p.RV.VU + 60.0;
  x[ip_AR_SYS] = V0_AR_SYS / p.AR_SYS.C;
  x[ip_C_SYS] = V0_C_SYS / p.C_SYS.C;
  x[ip_VEN_SYS] = V0_VEN_SYS / p.VEN_SYS.C;
  x[ip_AR_PUL] = V0_AR_PUL / p.AR_PUL.C;
  x[ip_C_PUL] = V0_PULCAP / (p.C_SH + p.C_PUL.C);
  x[ip_VEN_PUL] = V0_VEN_PUL / p.VEN_PUL.C;
  x[iQ_AR_SYS] = x[iQ_VEN_SYS] = x[iQ_AR_PUL] = x[iQ_VEN_PUL] = 0.0;
  return x;
}

}  // namespace cardio
