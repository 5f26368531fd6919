#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmflow/distortion.hpp"
#include "mmflow/geometry.hpp"
#include "mmflow/space.hpp"

namespace mmflow {

// Target volume-growth curve r -> v*_r in [0,1], nondecreasing with v*_oo = 1.
// Step profiles jump at `radii` (sorted) to `values`; v is left-continuous
// (value(r) is the mass strictly below r). Constant-curvature profiles are
// smooth; for K <= 0 the normalization needs a caller-supplied cap radius
// where the growth saturates at 1.
struct GrowthProfile {
    enum class Kind { step, constant_curvature };
    Kind kind = Kind::step;

    std::vector<double> radii;    // step: jump locations
    std::vector<double> values;   // step: value on (radii[j], radii[j+1]]

    int dim = 1;                  // constant curvature
    double K = 0.0;
    double cap = 0.0;             // saturation radius for K <= 0

    double value(double r) const;        // v*_r
    double integral_to(double r) const;  // int_0^r v*_t dt
    double saturation_radius() const;    // v* == 1 beyond this
    bool is_step() const { return kind == Kind::step; }

private:
    mutable std::vector<double> prefix_;  // step: int_0^{radii[j]} v*, built lazily
    void build_prefix() const;
};

GrowthProfile make_step_profile(std::vector<double> radii, std::vector<double> values);

// Common growth profile of a balanced space, or the mass-weighted average of
// the per-point profiles when not balanced.
GrowthProfile profile_from_space(const FiniteSpace& X);

// Space-form growth, normalized to total mass 1. K > 0 saturates at pi/sqrt(K)
// naturally; K <= 0 has infinite total growth, so a cap radius is required.
GrowthProfile model_profile_constant_curvature(int dim, double K, std::optional<double> cap = std::nullopt);

// Radial weight rho_r > 0 with finite moments; rho_bar(a) = int_a^oo rho.
struct WeightFunction {
    enum class Kind { exponential, truncated_uniform, custom };
    Kind kind = Kind::exponential;
    double lambda = 1.0;  // exponential
    double R = 1.0;       // truncated uniform on (0, R]
    std::vector<double> table_r;    // custom: breakpoints, first = 0
    std::vector<double> table_rho;  // custom: constant on [r_k, r_{k+1})

    double rho(double r) const;
    double rho_bar(double a) const;
    double int_rho_bar(double a, double b) const;  // b may be +inf
    double int_r_rho() const;                      // Lipschitz bound of F
    double kappa() const;                          // -sup_r r*rho_r (contraction rate)

    // int_0^L tau^j rho(s + tau) dtau for j = 0,1,2 (exact; series fallback
    // where the closed exponential forms cancel).
    void moments(double s, double L, double& m0, double& m1, double& m2) const;
};

WeightFunction make_exponential_weight(double lambda);
WeightFunction make_truncated_uniform_weight(double R);
WeightFunction make_custom_weight(std::vector<double> r, std::vector<double> rho);

// Mass of the strict ball {k : |g(i,k)| < r}.
double volume_growth(const FiniteSpace& X, int i, double r);

struct BalancedReport {
    bool balanced = false;
    std::optional<GrowthProfile> profile;
};

BalancedReport is_balanced(const FiniteSpace& X, double tol = 1e-9);

// F(X) = 1/2 int_0^oo int_X [int_0^r (v_t(x) - v*_t) dt]^2 dm(x) rho_r dr.
double eval_F(const FiniteSpace& X, const GrowthProfile& model, const WeightFunction& rho,
              Backend backend = Backend::parallel);

// Ambient gradient of -F: entry (x,y) is
// int_0^oo ((v_r(x)+v_r(y))/2 - v*_r) rho_bar(r v d(x,y)) dr.
TangentVector grad_minus_F(const FiniteSpace& X, const GrowthProfile& model, const WeightFunction& rho,
                           Backend backend = Backend::parallel);

// Unsmoothed variant: ((v_d(x)+v_d(y))/2 - v*_d) * rho_d at d = d(x,y).
TangentVector grad_minus_F_tilde(const FiniteSpace& X, const GrowthProfile& model, const WeightFunction& rho);

enum class Integrator { euler, rk4 };

struct FlowOptions {
    Integrator integrator = Integrator::rk4;
    double dt = 1e-3;
    long long steps = 0;
    long long save_stride = 1;
    bool with_G = false;  // drive F + G_K instead of F
    double K = 0.0;
    Backend backend = Backend::parallel;
};

struct FlowStep {
    double t = 0.0;
    std::vector<double> gauge;  // row-major n*n snapshot
    double F = 0.0;
    std::optional<double> G;
    double triangle_defect = 0.0;
    long long clamp_events = 0;  // entries clamped to 0 since the previous record
};

struct FlowTrajectory {
    int n = 0;
    std::vector<FlowStep> steps;
};

// Downward gradient flow of F (or F + G_K) on the gauge matrix of a uniform
// n-point space: d/dt d_ij = Grad(-F)_ij (+ Grad(-G_K)_ij). Negative entries
// are clamped to 0 (projection back to nonnegative gauges) and logged.
FlowTrajectory flow(const FiniteSpace& X0, const GrowthProfile& model, const WeightFunction& rho,
                    const FlowOptions& opt);

struct ContractionReport {
    Verdict verdict = Verdict::INCONCLUSIVE;
    double kappa = 0.0;
    double bound_factor = 1.0;  // e^{|kappa| T}
    double d0_lower = 0.0, d0_upper = 0.0;
    double dT_lower = 0.0, dT_upper = 0.0;
    bool certified0 = false, certifiedT = false;
    double ratio = 0.0;
};

// Runs both flows for time T and compares D at the endpoints against the
// e^{|kappa| T} contraction bound (slack factor 1 + 1e-3).
ContractionReport contraction_check(const FiniteSpace& X0, const FiniteSpace& X0p, const GrowthProfile& model,
                                    const WeightFunction& rho, double T, double dt,
                                    const SolverConfig& cfg = SolverConfig{},
                                    Backend backend = Backend::parallel);

}  // namespace mmflow
