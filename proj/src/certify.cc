#include "contrakt/certify.h"

#include <cmath>
#include <limits>
#include <random>

#include "contrakt/error.h"
#include "contrakt/parallel.h"

namespace contrakt {

double unit_draw(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

DomainSampler DomainSampler::cube(int dim, double half_width, std::uint64_t seed) {
  DomainSampler d;
  d.box.assign(dim, {-half_width, half_width});
  d.seed = seed;
  return d;
}

std::vector<Vector> DomainSampler::points() const {
  const int n = dim();
  if (n == 0) fail(ErrorKind::kInvalidInput, "sampler box is empty");
  for (const auto& [lo, hi] : box) {
    if (!(lo <= hi)) fail(ErrorKind::kInvalidInput, "sampler box has lo > hi");
  }
  std::vector<Vector> out;
  if (n <= 6 && grid_per_dim > 0) {
    const int g = grid_per_dim;
    std::vector<int> idx(n, 0);
    while (true) {
      Vector x(n);
      for (int i = 0; i < n; ++i) {
        const auto [lo, hi] = box[i];
        x(i) = g == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * idx[i] / (g - 1.0);
      }
      out.push_back(x);
      int i = 0;
      while (i < n && ++idx[i] == g) idx[i++] = 0;
      if (i == n) break;
    }
  }
  std::mt19937_64 gen(seed);
  for (int r = 0; r < random_count; ++r) {
    Vector x(n);
    for (int i = 0; i < n; ++i) {
      const auto [lo, hi] = box[i];
      x(i) = lo + (hi - lo) * unit_draw(gen());
    }
    out.push_back(x);
  }
  return out;
}

std::vector<Sample> DomainSampler::samples() const {
  const std::vector<Vector> pts = points();
  const std::vector<double> times = time_samples.empty() ? std::vector<double>{0.0} : time_samples;
  std::vector<Sample> out;
  out.reserve(pts.size() * times.size());
  for (const Vector& x : pts)
    for (double t : times) out.push_back({t, x});
  return out;
}

std::vector<Vector> DomainSampler::coefficients(int m) const {
  std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Vector> out;
  for (int r = 0; r < random_count; ++r) {
    Vector c(m);
    for (int i = 0; i < m; ++i) {
      const auto [lo, hi] = i < dim() ? box[i] : std::pair<double, double>{-1.0, 1.0};
      c(i) = lo + (hi - lo) * unit_draw(gen());
    }
    out.push_back(c);
  }
  return out;
}

const char* to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::kSemiContracting: return "semi_contracting";
    case CertificateKind::kWeaklyContracting: return "weakly_contracting";
    case CertificateKind::kDoublyContracting: return "doubly_contracting";
    case CertificateKind::kSyncCondition: return "sync_condition";
  }
  return "unknown";
}

const char* to_string(CertificateStatus s) {
  return s == CertificateStatus::kCertifiedOnSamples ? "certified_on_samples" : "refuted";
}

namespace {

const char* kSampledScope =
    "certified on samples only; not a proof outside the sampled box";
const char* kGlobalScope =
    "Jacobian is constant, so the sampled value holds on all of R^n";

// Evaluates value(sample) over all samples and returns the index of the
// first maximum along with the values.
std::pair<std::size_t, std::vector<double>> sampled_max(
    const std::vector<Sample>& samples,
    const std::function<double(const Sample&)>& value) {
  std::vector<double> values(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) { values[i] = value(samples[i]); });
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return {best, std::move(values)};
}

std::vector<Sample> samples_for(const DynSystem& sys, const DomainSampler& d) {
  if (d.dim() != sys.dim) {
    fail(ErrorKind::kDimensionMismatch, "sampler dimension does not match the system");
  }
  if (sys.constant_jacobian && sys.time_invariant) {
    const std::vector<Sample> all = d.samples();
    return {all.front()};
  }
  return d.samples();
}

Certificate certify_measure(const DynSystem& sys, const SemiNormSpec& s,
                            const DomainSampler& d, CertificateKind kind) {
  const std::vector<Sample> samples = samples_for(sys, d);
  auto [best, values] = sampled_max(samples, [&](const Sample& p) {
    return semi_measure(sys.jacobian(p.t, p.x), s).value;
  });
  Certificate c;
  c.kind = kind;
  c.norm = s.describe();
  c.max_measure = values[best];
  c.rate_c = -values[best];
  c.worst = samples[best];
  c.sample_count = static_cast<int>(samples.size());
  c.global = sys.constant_jacobian && sys.time_invariant;
  c.assumed_piecewise_analytic = sys.assumed_piecewise_analytic;
  c.seed = d.seed;
  c.scope = c.global ? kGlobalScope : kSampledScope;
  const bool ok = kind == CertificateKind::kWeaklyContracting
                      ? c.max_measure <= kWeakTolerance
                      : c.max_measure < 0.0;
  c.status = ok ? CertificateStatus::kCertifiedOnSamples : CertificateStatus::kRefuted;
  return c;
}

Matrix orthonormal(const Matrix& basis) {
  return basis.cols() == 0 ? basis : range_basis(basis);
}

}  // namespace

Certificate certify_semi_contraction(const DynSystem& sys, const SemiNormSpec& s,
                                     const DomainSampler& d) {
  return certify_measure(sys, s, d, CertificateKind::kSemiContracting);
}

Certificate certify_weak_contraction(const DynSystem& sys, const SemiNormSpec& norm,
                                     const DomainSampler& d) {
  if (norm.has_weight()) {
    fail(ErrorKind::kInvalidInput, "weak contraction is certified in a norm, not a semi-norm");
  }
  return certify_measure(sys, norm, d, CertificateKind::kWeaklyContracting);
}

InvarianceCheck check_infinitesimal_invariance(const DynSystem& sys,
                                               const Matrix& kernel_basis,
                                               const DomainSampler& d) {
  if (kernel_basis.rows() != sys.dim) {
    fail(ErrorKind::kDimensionMismatch, "kernel basis does not match the system");
  }
  const Matrix q = orthonormal(kernel_basis);
  const Matrix comp = Matrix::Identity(sys.dim, sys.dim) - orth_projection(q);
  const std::vector<Sample> samples = samples_for(sys, d);
  auto [best, values] = sampled_max(samples, [&](const Sample& p) {
    const Matrix df = sys.jacobian(p.t, p.x);
    const double scale = 1.0 + spectral_norm(df);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < q.cols(); ++j)
      worst = std::max(worst, (comp * (df * q.col(j))).norm() / scale);
    return worst;
  });
  InvarianceCheck out;
  out.max_residual = values[best];
  out.worst = samples[best];
  out.sample_count = static_cast<int>(samples.size());
  out.holds = out.max_residual <= 1e-8;
  return out;
}

InvarianceCheck check_shifted_invariance(const DynSystem& sys,
                                         const Matrix& kernel_basis,
                                         const Vector& x_star,
                                         const DomainSampler& d) {
  if (kernel_basis.rows() != sys.dim || x_star.size() != sys.dim) {
    fail(ErrorKind::kDimensionMismatch, "kernel basis or x* does not match the system");
  }
  const Matrix q = orthonormal(kernel_basis);
  const Matrix comp = Matrix::Identity(sys.dim, sys.dim) - orth_projection(q);
  std::vector<Vector> coeffs = d.coefficients(static_cast<int>(q.cols()));
  coeffs.insert(coeffs.begin(), Vector::Zero(q.cols()));
  const std::vector<double> times =
      d.time_samples.empty() ? std::vector<double>{0.0} : d.time_samples;
  std::vector<Sample> samples;
  for (const Vector& c : coeffs)
    for (double t : times) samples.push_back({t, x_star + q * c});
  auto [best, values] = sampled_max(samples, [&](const Sample& p) {
    const Vector f = sys.f(p.t, p.x);
    return (comp * f).norm() / (1.0 + f.norm());
  });
  InvarianceCheck out;
  out.max_residual = values[best];
  out.worst = samples[best];
  out.sample_count = static_cast<int>(samples.size());
  out.holds = out.max_residual <= 1e-8;
  return out;
}

InvarianceCheck commutation_residual(const DynSystem& sys, const Matrix& kernel_basis,
                                     const DomainSampler& d) {
  if (kernel_basis.rows() != sys.dim) {
    fail(ErrorKind::kDimensionMismatch, "kernel basis does not match the system");
  }
  const Matrix horizontal =
      Matrix::Identity(sys.dim, sys.dim) - orth_projection(orthonormal(kernel_basis));
  const std::vector<Sample> samples = samples_for(sys, d);
  auto [best, values] = sampled_max(samples, [&](const Sample& p) {
    const Matrix df = sys.jacobian(p.t, p.x);
    return spectral_norm(Matrix(horizontal * df - df * horizontal));
  });
  InvarianceCheck out;
  out.max_residual = values[best];
  out.worst = samples[best];
  out.sample_count = static_cast<int>(samples.size());
  out.holds = out.max_residual <= 1e-8 * (1.0 + spectral_norm(sys.jacobian(out.worst.t, out.worst.x)));
  return out;
}

Certificate sync_condition(const JacobianField& internal_jacobian, const CMatrix& q,
                           PNorm p, double lambda2, const DomainSampler& d) {
  if (q.rows() != q.cols() || q.rows() != d.dim()) {
    fail(ErrorKind::kSingularQ, "Q must be square with the internal dimension");
  }
  const Vector sv = svd(q).sigma;
  const double cond = sv.minCoeff() > 0.0 ? sv.maxCoeff() / sv.minCoeff()
                                          : std::numeric_limits<double>::infinity();
  if (!(cond <= 1e12)) {
    fail(ErrorKind::kSingularQ, "Q is singular or badly conditioned");
  }
  const CMatrix q_inv = q.inverse();
  const std::vector<Sample> samples = d.samples();
  auto [best, values] = sampled_max(samples, [&](const Sample& s) {
    return matrix_measure(CMatrix(q * to_complex(internal_jacobian(s.t, s.x)) * q_inv), p);
  });
  Certificate c;
  c.kind = CertificateKind::kSyncCondition;
  c.norm = "mu_" + p.to_string() + ",Q";
  c.threshold = lambda2;
  c.max_measure = values[best];
  c.rate_c = lambda2 - values[best];
  c.worst = samples[best];
  c.sample_count = static_cast<int>(samples.size());
  c.seed = d.seed;
  c.condition_number = cond;
  c.scope = std::string(kSampledScope) +
            "; the synchronization hypothesis quantifies over all x";
  c.status = c.rate_c > 0.0 ? CertificateStatus::kCertifiedOnSamples
                            : CertificateStatus::kRefuted;
  return c;
}

DoublyReport analyze_doubly_contracting(const DynSystem& sys, PNorm weak_norm,
                                        const SemiNormSpec& semi_spec,
                                        const Matrix& equilibrium_basis,
                                        const DomainSampler& d,
                                        const std::optional<Vector>& x_star) {
  if (equilibrium_basis.rows() != sys.dim) {
    fail(ErrorKind::kDimensionMismatch, "equilibrium basis does not match the system");
  }
  const Vector base = x_star.value_or(Vector::Zero(sys.dim));
  const Matrix s_basis = orthonormal(equilibrium_basis);

  DoublyReport rep;
  std::vector<Vector> coeffs = d.coefficients(static_cast<int>(s_basis.cols()));
  coeffs.insert(coeffs.begin(), Vector::Zero(s_basis.cols()));
  const std::vector<double> times =
      d.time_samples.empty() ? std::vector<double>{0.0} : d.time_samples;
  for (const Vector& c : coeffs)
    for (double t : times) {
      const Vector z = base + s_basis * c;
      rep.equilibrium_residual =
          std::max(rep.equilibrium_residual, sys.f(t, z).norm() / (1.0 + z.norm()));
    }
  if (rep.equilibrium_residual > 1e-8) {
    fail(ErrorKind::kInvalidInput, "f does not vanish on the supplied equilibrium subspace");
  }

  rep.weak = certify_weak_contraction(sys, SemiNormSpec(weak_norm), d);
  rep.semi = certify_semi_contraction(sys, semi_spec, d);
  Certificate c = rep.semi;
  c.kind = CertificateKind::kDoublyContracting;
  c.norm = rep.weak.norm;
  c.second_norm = rep.semi.norm;
  c.global = rep.weak.global && rep.semi.global;
  c.scope = c.global ? kGlobalScope : kSampledScope;
  const bool ok = rep.weak.certified() && rep.semi.certified();
  c.status = ok ? CertificateStatus::kCertifiedOnSamples : CertificateStatus::kRefuted;
  if (!rep.weak.certified()) {
    c.worst = rep.weak.worst;
    c.max_measure = rep.weak.max_measure;
  }
  if (ok) {
    const Matrix df = sys.jacobian(0.0, base);
    c.predicted_rate = -complement_adjoint_abscissa(to_complex(df), to_complex(s_basis));
  }
  rep.certificate = c;
  return rep;
}

}  // namespace contrakt
