#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "contrakt/linalg.h"
#include "contrakt/measures.h"
#include "contrakt/systems.h"

namespace contrakt {

struct Sample {
  double t = 0.0;
  Vector x;
};

// Sample points in a box: a full grid when dim <= 6, then random_count
// uniform draws, each paired with every time sample. Deterministic in seed;
// raising random_count only appends samples.
struct DomainSampler {
  std::vector<std::pair<double, double>> box;
  int grid_per_dim = 5;
  int random_count = 200;
  std::vector<double> time_samples = {0.0};
  std::uint64_t seed = 0;

  static DomainSampler cube(int dim, double half_width, std::uint64_t seed = 0);

  int dim() const { return static_cast<int>(box.size()); }
  std::vector<Vector> points() const;
  std::vector<Sample> samples() const;
  // random_count coefficient vectors of length m, coordinate i drawn from
  // box[i] (or [-1, 1] past the box).
  std::vector<Vector> coefficients(int m) const;
};

// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
double unit_draw(std::uint64_t bits);

enum class CertificateKind {
  kSemiContracting,
  kWeaklyContracting,
  kDoublyContracting,
  kSyncCondition,
};
const char* to_string(CertificateKind k);

enum class CertificateStatus { kCertifiedOnSamples, kRefuted };
const char* to_string(CertificateStatus s);

struct Certificate {
  CertificateKind kind = CertificateKind::kSemiContracting;
  std::string norm;
  std::string second_norm;  // doubly: the semi-norm leg
  double threshold = 0.0;   // certified iff max sampled measure < threshold (<= for weak)
  double max_measure = 0.0;
  double rate_c = 0.0;      // -max measure, or lambda_2 - max for sync
  Sample worst;             // witness when refuted
  int sample_count = 0;
  CertificateStatus status = CertificateStatus::kRefuted;
  // Constant Jacobian: one sample decides for all of R^n.
  bool global = false;
  bool assumed_piecewise_analytic = false;
  std::uint64_t seed = 0;
  std::optional<double> predicted_rate;
  std::optional<double> condition_number;  // sync: cond(Q)
  std::string scope;

  bool certified() const { return status == CertificateStatus::kCertifiedOnSamples; }
};

constexpr double kWeakTolerance = 1e-9;

// mu of Df(t, x) in the semi-norm s over the sampler; certified iff max < 0.
Certificate certify_semi_contraction(const DynSystem& sys, const SemiNormSpec& s,
                                     const DomainSampler& d);
// Same with a plain norm and threshold 0 (tolerance 1e-9).
Certificate certify_weak_contraction(const DynSystem& sys, const SemiNormSpec& norm,
                                     const DomainSampler& d);

struct InvarianceCheck {
  bool holds = true;
  double max_residual = 0.0;  // relative, see below
  Sample worst;
  int sample_count = 0;
};

// ||(I - P) Df(t,x) u||_2 / (1 + ||Df||_2) <= 1e-8 for each orthonormal
// kernel vector u.
InvarianceCheck check_infinitesimal_invariance(const DynSystem& sys,
                                               const Matrix& kernel_basis,
                                               const DomainSampler& d);
// ||(I - P) f(t, z)||_2 / (1 + ||f(t, z)||_2) <= 1e-8 at z = x* + sum c_i u_i.
InvarianceCheck check_shifted_invariance(const DynSystem& sys,
                                         const Matrix& kernel_basis,
                                         const Vector& x_star,
                                         const DomainSampler& d);

// max ||pi_H Df - Df pi_H||_2 over the samples, pi_H the orthogonal projector
// onto Ker^perp. Zero means Df commutes with the horizontal projection.
InvarianceCheck commutation_residual(const DynSystem& sys, const Matrix& kernel_basis,
                                     const DomainSampler& d);

// c = lambda_2 - max mu_p(Q Df Q^{-1}) over the samples; certified iff c > 0.
// Throws SingularQ when Q is not square or cond(Q) > 1e12.
Certificate sync_condition(const JacobianField& internal_jacobian,
                           const CMatrix& q, PNorm p, double lambda2,
                           const DomainSampler& d);

struct DoublyReport {
  Certificate certificate;  // conjunction
  Certificate weak;
  Certificate semi;
  double equilibrium_residual = 0.0;  // max ||f|| on sampled subspace points
};

// Weak leg in weak_norm, semi leg in semi_spec, equilibria x_star + span(S).
// When both pass, predicted rate -alpha_{S^perp}(Df(x*)^T). Throws
// InvalidInput if f does not vanish (1e-8) on the sampled subspace points.
DoublyReport analyze_doubly_contracting(const DynSystem& sys, PNorm weak_norm,
                                        const SemiNormSpec& semi_spec,
                                        const Matrix& equilibrium_basis,
                                        const DomainSampler& d,
                                        const std::optional<Vector>& x_star = std::nullopt);

}  // namespace contrakt
