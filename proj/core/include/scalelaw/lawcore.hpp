#ifndef SCALELAW_LAWCORE_HPP
#define SCALELAW_LAWCORE_HPP

// Scaling-law forms and the compute-optimal split.
//
//   Chinchilla:            L(N, D)    = A/N^alpha + B/D^beta + E
//   Information-resolution L(N, D, r) = A/N^alpha + (B/D^beta) r^-nu + E + kappa (1 - r)^mu
//
// r is the information resolution of the training data, in (0, 1]. At r = 1
// the second form reduces to the first. All losses are in nats (or in the
// task-loss units of the records they were fitted to).

namespace scalelaw {

struct ChinchillaParams {
  double A = 1.0;
  double alpha = 0.5;
  double B = 1.0;
  double beta = 0.5;
  double E = 0.0;
};

struct InfoResolutionParams {
  ChinchillaParams base;
  double nu = 0.1;     // variance-inflation exponent
  double mu = 1.0;     // loss-shift exponent, 1 for deterministic transformations
  double kappa = 1.0;  // loss-shift coefficient
};

struct RunRecord {
  double n_params = 0.0;
  double n_data = 0.0;
  double rho = 1.0;
  double loss = 0.0;
};

struct ComputeAllocation {
  double compute = 0.0;
  double n_opt = 0.0;
  double d_opt = 0.0;
};

// Validators throw Error(kDomain) naming the offending field.
void validate(const ChinchillaParams& p);
void validate(const InfoResolutionParams& p);
void validate(const RunRecord& r);
void validate_rho(double rho);

double eval_chinchilla(const ChinchillaParams& p, double n, double d);
double eval_inforesolution(const InfoResolutionParams& p, double n, double d, double rho);

// rho^-nu; >= 1 on the valid domain.
double variance_inflation(double rho, double nu);

// kappa (1 - rho)^mu.
double loss_shift(const InfoResolutionParams& p, double rho);

// Asymptotic loss E + kappa (1 - rho)^mu as N, D -> infinity.
double loss_floor(const InfoResolutionParams& p, double rho);

// Chinchilla-optimal model size for C = 6 N D on clean data:
//   N*(C, 1) = [(alpha A) / (beta B)]^(1/(alpha+beta)) (C/6)^(beta/(alpha+beta))
double chinchilla_optimal_n(const ChinchillaParams& p, double compute);

// N*(C, rho) = N*(C, 1) rho^(nu/(alpha+beta)), D* = C / (6 N*).
ComputeAllocation optimal_allocation(const InfoResolutionParams& p, double compute, double rho);

}  // namespace scalelaw

#endif  // SCALELAW_LAWCORE_HPP
