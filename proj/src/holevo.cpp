#include "ppmqkd/holevo.hpp"

#include "ppmqkd/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace ppmqkd {

namespace {

constexpr double kPhysicalTol = 5e-10;

double det2_fma(double va, double vb, double c) {
    // va * vb - c^2 with a compensated product difference.
    const double w = c * c;
    const double e = std::fma(c, c, -w);
    const double f = std::fma(va, vb, -w);
    return f - e;
}

Block2 disturb_block(const Block2& b, double eta, double eps) {
    Block2 out;
    out.var_a = b.var_a;
    out.var_b = (1.0 + eps) * b.var_b;
    out.cov = (1.0 - eta) * b.cov;
    // (1+eps) det + cov^2 (eps + eta (2 - eta)); every increment is
    // nonnegative, so near-singular blocks keep relative accuracy.
    out.det = (1.0 + eps) * b.det + b.cov * b.cov * (eps + eta * (2.0 - eta));
    out.diff_a = b.diff_a + eta * b.cov;
    out.diff_b = b.diff_b + eps * b.var_b + eta * b.cov;
    return out;
}

} // namespace

Block2 Block2::from_entries(double va, double vb, double c) {
    Block2 b;
    b.var_a = va;
    b.var_b = vb;
    b.cov = c;
    b.det = det2_fma(va, vb, c);
    b.diff_a = va - c;
    b.diff_b = vb - c;
    return b;
}

Tfcm Tfcm::from_entries(double t_var_a, double t_var_b, double t_cov,
                        double w_var_a, double w_var_b, double w_cov) {
    Tfcm t;
    t.time = Block2::from_entries(t_var_a, t_var_b, t_cov);
    t.freq = Block2::from_entries(w_var_a, w_var_b, w_cov);
    return t;
}

Tfcm baseline_tfcm(const BiphotonParams& p) {
    if (!(p.sigma_cor_s > 0.0 && p.sigma_coh_s > 0.0))
        throw std::invalid_argument("baseline_tfcm: coherence times must be > 0");
    if (!(p.sigma_cor_s < 2.0 * p.sigma_coh_s))
        throw std::invalid_argument("baseline_tfcm: sigma_cor >= 2 sigma_coh degenerates the covariances");

    const double u = 0.25 * p.sigma_cor_s * p.sigma_cor_s;
    const double v = p.sigma_coh_s * p.sigma_coh_s;
    const double pp = 1.0 / (4.0 * p.sigma_cor_s * p.sigma_cor_s);
    const double qq = 1.0 / (16.0 * p.sigma_coh_s * p.sigma_coh_s);

    Tfcm t;
    t.time.var_a = t.time.var_b = u + v;
    t.time.cov = v - u;
    t.time.det = 4.0 * u * v;
    t.time.diff_a = t.time.diff_b = 2.0 * u;

    t.freq.var_a = t.freq.var_b = pp + qq;
    t.freq.cov = pp - qq;
    t.freq.det = 4.0 * pp * qq;
    t.freq.diff_a = t.freq.diff_b = 2.0 * qq;
    return t;
}

Tfcm apply_disturbance(const Tfcm& t0, const Disturbance& d) {
    d.validate();
    Tfcm t;
    t.time = disturb_block(t0.time, d.eta_t, d.eps_t);
    t.freq = disturb_block(t0.freq, d.eta_w, d.eps_w);
    return t;
}

Tfcm apply_time_assumptions(const Tfcm& t, const TimeAssumptions& ta) {
    if (!(ta.bob_time_variance_s2 > 0.0))
        throw std::invalid_argument("TimeAssumptions: bob_time_variance must be > 0");
    if (!(ta.jitter_rms_s > 0.0))
        throw std::invalid_argument("TimeAssumptions: jitter_rms must be > 0");
    const double tb = ta.bob_time_variance_s2;
    const double taa = ta.alice_variance();
    const double j2 = ta.jitter_rms_s * ta.jitter_rms_s;

    Tfcm out = t;
    if (ta.cov_rule == TimeAssumptions::CovRule::difference) {
        if (taa != tb)
            throw std::invalid_argument("TimeAssumptions: difference rule requires equal time variances");
        if (!(j2 < 2.0 * tb))
            throw std::invalid_argument("TimeAssumptions: jitter too large for frame time variance");
        out.time.var_a = out.time.var_b = tb;
        out.time.cov = tb - 0.5 * j2;
        out.time.det = j2 * (tb - 0.25 * j2);
        out.time.diff_a = out.time.diff_b = 0.5 * j2;
    } else {
        if (!(j2 < tb))
            throw std::invalid_argument("TimeAssumptions: jitter too large for conditional rule");
        const double cov = std::sqrt(taa * (tb - j2));
        out.time.var_a = taa;
        out.time.var_b = tb;
        out.time.cov = cov;
        out.time.det = taa * j2;
        out.time.diff_a = taa - cov;
        out.time.diff_b = tb - cov;
    }
    return out;
}

double franson_visibility(const Tfcm& t, double delta_t_s) {
    if (!(delta_t_s > 0.0))
        throw std::invalid_argument("franson_visibility: delta_t must be > 0");
    return std::exp(-0.5 * t.omega_diff_sq() * delta_t_s * delta_t_s);
}

double disturbance_budget(const VisibilityMeasurement& v, double delta_t_s) {
    v.validate();
    if (!(delta_t_s > 0.0))
        throw std::invalid_argument("disturbance_budget: delta_t must be > 0");
    const double deficit = std::max(0.0, v.v_theory - v.v_measured);
    return 2.0 * deficit / (delta_t_s * delta_t_s);
}

SymplecticQuantities symplectic_quantities(const Tfcm& t) {
    SymplecticQuantities sq;
    sq.i1 = t.time.var_a * t.freq.var_a;
    sq.i2 = t.time.var_b * t.freq.var_b;
    sq.i3 = t.time.cov * t.freq.cov;
    sq.i4 = t.time.det * t.freq.det;

    // Stored covariances carry the sign convention in which the unperturbed
    // pair has positive entries in both quadrature blocks; in canonical
    // variables the cross-block determinant is -i3, hence the minus sign.
    // The grouped form below is an algebraic identity for
    // i1 + i2 - 2 * cov_t * cov_w that avoids cancellation for
    // strongly correlated blocks.
    const double delta = t.time.var_a * t.freq.diff_a + t.time.var_b * t.freq.diff_b +
                         (t.time.diff_a + t.time.diff_b) * t.freq.cov;

    if (t.time.det < 0.0 || t.freq.det < 0.0 || delta < 0.0) {
        sq.d_plus = sq.d_minus = 0.0;
        sq.physical = false;
        return sq;
    }

    const double r = std::sqrt(sq.i4);
    double disc = (delta - 2.0 * r) * (delta + 2.0 * r);
    if (disc < 0.0) disc = 0.0;
    const double s = std::sqrt(disc);

    const double dp2 = 0.5 * (delta + s);
    const double dm2 = (delta + s) > 0.0 ? 2.0 * sq.i4 / (delta + s) : 0.5 * delta;
    sq.d_plus = std::sqrt(dp2);
    sq.d_minus = std::sqrt(dm2);
    sq.physical = sq.d_minus >= 0.5 - kPhysicalTol;
    return sq;
}

double entropy_f(double d) {
    if (d < 0.5 - 1e-9)
        throw std::domain_error("entropy_f: d must be >= 1/2");
    if (d <= 0.5) return 0.0;
    return xlog2x(d + 0.5) - xlog2x(d - 0.5);
}

double joint_entropy(const Tfcm& t) {
    const SymplecticQuantities sq = symplectic_quantities(t);
    if (!sq.physical)
        throw std::domain_error("joint_entropy: matrix is not physical (d_minus < 1/2)");
    return entropy_f(std::max(0.5, sq.d_plus)) + entropy_f(std::max(0.5, sq.d_minus));
}

double conditional_entropy_given_ta(const Tfcm& t) {
    if (!(t.time.var_a > 0.0))
        throw std::invalid_argument("conditional_entropy_given_ta: Alice time variance must be > 0");
    const double det_cond = (t.time.det / t.time.var_a) * t.freq.var_b;
    const double d = std::sqrt(std::max(0.0, det_cond));
    return entropy_f(std::max(0.5, d));
}

double holevo_chi(const Tfcm& t) {
    return std::max(0.0, joint_entropy(t) - conditional_entropy_given_ta(t));
}

HolevoSupResult holevo_sup(const Tfcm& t0, double budget, const TimeAssumptions& ta, int grid_n) {
    if (!(budget >= 0.0))
        throw std::invalid_argument("holevo_sup: budget must be >= 0");
    if (grid_n < 2) grid_n = 2;

    const double b_w0 = t0.freq.var_b;
    const double c_w0 = t0.freq.cov;

    auto chi_of = [&](double eta, double eps) -> std::optional<double> {
        Disturbance d;
        d.eta_w = std::clamp(eta, 0.0, 1.0);
        d.eps_w = std::max(0.0, eps);
        const Tfcm t = apply_time_assumptions(apply_disturbance(t0, d), ta);
        const SymplecticQuantities sq = symplectic_quantities(t);
        if (!sq.physical) return std::nullopt;
        const double joint = entropy_f(std::max(0.5, sq.d_plus)) +
                             entropy_f(std::max(0.5, sq.d_minus));
        return std::max(0.0, joint - conditional_entropy_given_ta(t));
    };

    HolevoSupResult best;
    best.feasible = false;
    auto consider = [&](double eta, double eps) {
        const auto chi = chi_of(eta, eps);
        if (!chi) return;
        if (!best.feasible || *chi > best.chi_bits) {
            best.chi_bits = *chi;
            best.eta_w = eta;
            best.eps_w = eps;
        }
        best.feasible = true;
    };

    consider(0.0, 0.0);
    if (budget == 0.0) {
        if (!best.feasible) best.status = "no physical matrix in the feasible set";
        return best;
    }

    const double eta_max = c_w0 > 0.0 ? std::min(1.0, budget / (2.0 * c_w0)) : 1.0;
    auto eps_limit = [&](double eta) {
        if (!(b_w0 > 0.0)) return 0.0;
        return std::max(0.0, (budget - 2.0 * eta * c_w0) / b_w0);
    };

    // Line search along the constraint boundary.
    auto boundary_value = [&](double s) {
        const double eta = s * eta_max;
        const auto chi = chi_of(eta, eps_limit(eta));
        return chi ? *chi : -1e300;
    };
    const ScalarMax line = golden_section_max(boundary_value, 0.0, 1.0, 120);
    if (line.value > -1e299) consider(line.x * eta_max, eps_limit(line.x * eta_max));

    // Dense feasibility grid, boundary rows included.
    for (int i = 0; i < grid_n; ++i) {
        const double eta = eta_max * static_cast<double>(i) / static_cast<double>(grid_n - 1);
        const double emax = eps_limit(eta);
        for (int j = 0; j < grid_n; ++j) {
            const double eps = emax * static_cast<double>(j) / static_cast<double>(grid_n - 1);
            consider(eta, eps);
        }
    }

    if (!best.feasible) best.status = "no physical matrix in the feasible set";
    return best;
}

double finite_key_frequency_bound(double omega_diff_sq, long m, double eps_pe) {
    if (m < 2)
        throw std::invalid_argument("finite_key_frequency_bound: m must be >= 2");
    if (!(eps_pe > 0.0 && eps_pe <= 1.0))
        throw std::invalid_argument("finite_key_frequency_bound: eps_pe must be in (0, 1]");
    if (!(omega_diff_sq >= 0.0))
        throw std::invalid_argument("finite_key_frequency_bound: statistic must be >= 0");
    const double factor = 1.0 + 2.0 / std::sqrt(static_cast<double>(m)) * inverse_erf(1.0 - eps_pe);
    return omega_diff_sq * factor;
}

double max_physical_sigma_coh(const BiphotonParams& p, const TimeAssumptions& ta) {
    auto physical_at = [&](double sigma_coh) {
        BiphotonParams q = p;
        q.sigma_coh_s = sigma_coh;
        const Tfcm t = apply_time_assumptions(baseline_tfcm(q), ta);
        return symplectic_quantities(t).physical;
    };

    double lo = p.sigma_cor_s * (1.0 + 1e-9);
    if (!physical_at(lo)) return 0.0;

    double hi = std::max(2.0 * lo, std::sqrt(ta.bob_time_variance_s2));
    while (hi < 1.0 && physical_at(hi)) {
        lo = hi;
        hi *= 2.0;
    }
    if (hi >= 1.0) return lo;  // effectively uncapped for any realistic pump

    for (int i = 0; i < 200; ++i) {
        const double mid = std::sqrt(lo * hi);
        if (physical_at(mid)) lo = mid; else hi = mid;
    }
    return lo * (1.0 - 1e-12);
}

} // namespace ppmqkd
