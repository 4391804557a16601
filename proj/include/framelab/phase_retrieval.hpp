#pragma once

// Phase retrieval and norm retrieval for real vector and subspace families.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "framelab/frame.hpp"
#include "framelab/parallel.hpp"
#include "framelab/random.hpp"
#include "framelab/spark.hpp"

namespace framelab {

enum class PrDecision { PassExact, PassBudgeted, Fail, Inconclusive };

constexpr std::string_view decision_name(PrDecision d) {
    switch (d) {
        case PrDecision::PassExact: return "PASS_exact";
        case PrDecision::PassBudgeted: return "PASS_budgeted";
        case PrDecision::Fail: return "FAIL";
        case PrDecision::Inconclusive: return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

template <Scalar T>
struct WitnessPair {
    std::vector<T> x;
    std::vector<T> y;
};

template <Scalar T>
struct PRCertificate {
    PrDecision decision = PrDecision::Inconclusive;
    std::string_view mode = arithmetic_mode<T>();
    /// Which test decided: "complement_property", "onb_union", "search", ...
    std::string stage;
    std::optional<WitnessPair<T>> witness;
    /// True when the witness was checked in exact arithmetic.
    bool witness_exact = false;
    /// Largest measurement mismatch of the witness (0 when exact).
    double witness_residual = 0.0;
    std::optional<PartitionCertificate> partition;
    EnumerationDigest digest;
    /// Multistart searches only.
    std::size_t search_budget = 0;
    std::optional<double> min_residual;
    std::optional<double> max_norm_gap;

    bool passed() const { return decision == PrDecision::PassExact || decision == PrDecision::PassBudgeted; }
};

namespace detail {

template <Scalar T>
std::vector<T> first_null_vector(const Matrix<T>& rows, std::size_t n, const Tolerance& tol) {
    const Matrix<T> a = rows.rows() == 0 ? Matrix<T>(0, n) : rows;
    const Matrix<T> ns = null_space_basis(a, tol);
    if (ns.cols() == 0) throw FrameError(ErrorCode::InvalidArgument, "side spans the space; no orthogonal vector");
    return ns.column(0);
}

template <Scalar T>
WitnessPair<T> polarized_pair(const std::vector<T>& u, const std::vector<T>& v) {
    WitnessPair<T> w{std::vector<T>(u.size()), std::vector<T>(u.size())};
    for (std::size_t k = 0; k < u.size(); ++k) {
        w.x[k] = (u[k] + v[k]) / T(2);
        w.y[k] = (u[k] - v[k]) / T(2);
    }
    return w;
}

template <Scalar T>
bool nonzero(const std::vector<T>& v, double tol) {
    if constexpr (ExactScalar<T>) {
        (void)tol;
        return std::any_of(v.begin(), v.end(), [](const T& a) { return sgn(a) != 0; });
    } else {
        return norm2(v) > tol;
    }
}

/// x^T P x.
template <RealScalar T>
T quadratic_form(const Matrix<T>& p, const std::vector<T>& x) {
    const auto px = p * std::span<const T>(x);
    return dot(px, x);
}

}  // namespace detail

/// Checks |<x, phi_i>| = |<y, phi_i>| for all i and x != +-y. Returns the
/// largest squared-measurement mismatch, or nullopt when the pair is not a
/// witness.
template <RealScalar T>
std::optional<double> verify_vector_witness(const VectorFamily<T>& f, const WitnessPair<T>& w, const Tolerance& tol) {
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const T a = dot<T>(std::span<const T>(w.x), f[i]);
        const T b = dot<T>(std::span<const T>(w.y), f[i]);
        const T diff = a * a - b * b;
        if constexpr (ExactScalar<T>) {
            if (sgn(diff) != 0) return std::nullopt;
        } else {
            const double scale = std::max(1.0, norm2<T>(f[i]) * norm2<T>(f[i]) * (norm2(w.x) + norm2(w.y)));
            worst = std::max(worst, std::abs(diff));
            if (std::abs(diff) > tol.witness * scale) return std::nullopt;
        }
    }
    std::vector<T> sum(w.x.size()), dif(w.x.size());
    for (std::size_t k = 0; k < w.x.size(); ++k) {
        sum[k] = w.x[k] + w.y[k];
        dif[k] = w.x[k] - w.y[k];
    }
    if (!detail::nonzero(sum, tol.witness) || !detail::nonzero(dif, tol.witness)) return std::nullopt;
    return worst;
}

/// Witness pair from a partition with two non-spanning sides:
/// u orthogonal to one side, v to the other, x = (u+v)/2, y = (u-v)/2.
template <RealScalar T>
WitnessPair<T> witness_from_partition(const VectorFamily<T>& f, const PartitionCertificate& p, const Tolerance& tol) {
    const auto u = detail::first_null_vector(f.rows().select_rows(p.subset), f.dim(), tol);
    const auto v = detail::first_null_vector(f.rows().select_rows(p.complement), f.dim(), tol);
    return detail::polarized_pair(u, v);
}

/// Real phase retrieval holds exactly when the complement property does.
template <RealScalar T>
PRCertificate<T> pr_vectors_real(const VectorFamily<T>& f, const Context& ctx = {}) {
    PRCertificate<T> cert;
    cert.stage = "complement_property";
    const auto cp = check_complement_property(f, ctx);
    cert.digest = cp.digest;
    if (cp.holds) {
        cert.decision = PrDecision::PassExact;
        return cert;
    }
    cert.partition = cp.witness;
    auto w = witness_from_partition(f, *cp.witness, ctx.tol);
    const auto check = verify_vector_witness(f, w, ctx.tol);
    if (!check) {
        // Only reachable through float round-off on an ill-conditioned split.
        cert.decision = PrDecision::Inconclusive;
        return cert;
    }
    cert.decision = PrDecision::Fail;
    cert.witness = std::move(w);
    cert.witness_exact = ExactScalar<T>;
    cert.witness_residual = *check;
    return cert;
}

enum class ComplexVerdict { Fail, InconclusiveNecessaryPassed };

struct ComplexPrCertificate {
    ComplexVerdict verdict = ComplexVerdict::InconclusiveNecessaryPassed;
    CpCertificate complement_property;
};

/// Complex phase retrieval implies the complement property; only that
/// necessary direction is decided.
inline ComplexPrCertificate pr_vectors_complex_necessary(const VectorFamily<Complex>& f, const Context& ctx = {}) {
    ComplexPrCertificate c;
    c.complement_property = check_complement_property(f, ctx);
    c.verdict = c.complement_property.holds ? ComplexVerdict::InconclusiveNecessaryPassed : ComplexVerdict::Fail;
    return c;
}

namespace detail {

/// Norm retrieval in a space with coordinates c and inner product c^T G c.
/// `a` holds the measurement vectors as rows in these coordinates and
/// `to_ambient` maps coordinates back for the witness. Polarizing
/// |<x,f>|^2 - |<y,f>|^2 = <x+y,f><x-y,f> shows the family fails exactly when
/// some split I, I^c has u annihilated by the rows in I and v by the rows in
/// I^c with u^T G v != 0; then x = (u+v)/2, y = (u-v)/2 share all
/// measurements while ||x||^2 - ||y||^2 = u^T G v.
template <RealScalar T>
PRCertificate<T> norm_retrieval_core(const Matrix<T>& a, const Matrix<T>& metric, const Matrix<T>& to_ambient,
                                     const Context& ctx) {
    const std::size_t m = a.rows();
    const std::size_t d = metric.rows();
    PRCertificate<T> cert;
    cert.stage = "complement_orthogonality";
    auto ambient = [&](const std::vector<T>& c) { return to_ambient * std::span<const T>(c); };
    auto finish_fail = [&](const std::vector<T>& u, const std::vector<T>& v, Mask s) {
        cert.decision = PrDecision::Fail;
        cert.witness = polarized_pair(ambient(u), ambient(v));
        cert.witness_exact = ExactScalar<T>;
        RankOracle<T> o(a, ctx.tol);
        cert.partition = make_partition(s, m, m == 0 ? 0 : o.rank_mask(s),
                                        m == 0 ? 0 : o.rank_mask(full_mask(m) & ~s), d);
    };
    if (d == 0) {
        cert.decision = PrDecision::PassExact;
        return cert;
    }
    if (m == 0) {
        std::vector<T> e(d, T(0));
        e[0] = T(1);
        finish_fail(e, e, 0);
        return cert;
    }
    require_scan_size(m, ctx);
    RankOracle<T> oracle(a, ctx.tol);
    const Mask all = full_mask(m);
    cert.decision = PrDecision::PassExact;
    detail::for_each_partition(oracle, d, true, ctx, [&](Mask s, const PairDims& dims) {
        ++cert.digest.checked;
        if (dims.pruned || dims.dim_c >= d) {
            ++cert.digest.pruned;
            return true;
        }
        const Matrix<T> nu = null_space_basis(a.select_rows(mask_indices(s)), ctx.tol);
        const auto rest = mask_indices(all & ~s);
        const Matrix<T> nv = rest.empty() ? Matrix<T>::identity(d) : null_space_basis(a.select_rows(rest), ctx.tol);
        const Matrix<T> k = nu.transpose() * metric * nv;
        std::size_t bi = 0, bj = 0;
        double best = 0.0;
        bool found = false;
        for (std::size_t i = 0; i < k.rows(); ++i)
            for (std::size_t j = 0; j < k.cols(); ++j) {
                if constexpr (ExactScalar<T>) {
                    if (!found && sgn(k(i, j)) != 0) {
                        bi = i;
                        bj = j;
                        found = true;
                    }
                } else {
                    if (std::abs(k(i, j)) > best) {
                        best = std::abs(k(i, j));
                        bi = i;
                        bj = j;
                    }
                }
            }
        if constexpr (!ExactScalar<T>) found = best > ctx.tol.witness;
        if (!found) return true;
        finish_fail(nu.column(bi), nv.column(bj), s);
        return false;
    });
    return cert;
}

}  // namespace detail

/// Norm retrieval by real vectors: for every split, the orthogonal
/// complements of the two side spans must be mutually orthogonal.
template <RealScalar T>
PRCertificate<T> norm_retrieval_vectors_real(const VectorFamily<T>& f, const Context& ctx = {}) {
    const auto id = Matrix<T>::identity(f.dim());
    return detail::norm_retrieval_core(f.rows(), id, id, ctx);
}

/// Measurements ||P_i x||^2 for every subspace.
template <RealScalar T>
std::vector<T> projection_norms_squared(const SubspaceFamily<T>& sf, const std::vector<T>& x) {
    std::vector<T> out;
    for (const auto& s : sf.subspaces()) out.push_back(detail::quadratic_form(s.projector(), x));
    return out;
}

/// Largest | ||P_i x||^2 - ||P_i y||^2 | (exact zero check in exact mode).
template <RealScalar T>
std::optional<double> verify_subspace_witness(const SubspaceFamily<T>& sf, const WitnessPair<T>& w,
                                              const Tolerance& tol) {
    const auto nx = projection_norms_squared(sf, w.x);
    const auto ny = projection_norms_squared(sf, w.y);
    double worst = 0.0;
    for (std::size_t i = 0; i < nx.size(); ++i) {
        if constexpr (ExactScalar<T>) {
            if (nx[i] != ny[i]) return std::nullopt;
        } else {
            worst = std::max(worst, std::abs(nx[i] - ny[i]));
        }
    }
    if constexpr (!ExactScalar<T>) {
        if (worst > tol.witness) return std::nullopt;
    }
    return worst;
}

namespace detail {

using EMat = Eigen::MatrixXd;
using EVec = Eigen::VectorXd;

inline std::vector<EMat> float_projectors(const SubspaceFamily<double>& sf) {
    std::vector<EMat> out;
    for (const auto& s : sf.subspaces()) out.push_back(to_eigen(s.projector()));
    return out;
}

template <RealScalar T>
std::vector<EMat> float_projectors(const SubspaceFamily<T>& sf) {
    std::vector<EMat> out;
    for (const auto& s : sf.subspaces()) out.push_back(to_eigen(to_float(s.projector())));
    return out;
}

inline EVec to_evec(const std::vector<double>& v) {
    EVec e(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) e(static_cast<Eigen::Index>(k)) = v[k];
    return e;
}

inline std::vector<double> from_evec(const EVec& e) { return {e.data(), e.data() + e.size()}; }

/// Smallest eigenpair of sum_i (P_i w)(P_i w)^T.
inline std::pair<double, EVec> min_eigenpair(const std::vector<EMat>& proj, const EVec& w) {
    const Eigen::Index n = w.size();
    EMat acc = EMat::Zero(n, n);
    for (const auto& p : proj) {
        const EVec pw = p * w;
        acc.noalias() += pw * pw.transpose();
    }
    Eigen::SelfAdjointEigenSolver<EMat> es(acc);
    return {std::max(0.0, es.eigenvalues()(0)), es.eigenvectors().col(0)};
}

struct AltMinResult {
    EVec u;
    EVec v;
    double residual = std::numeric_limits<double>::infinity();
};

/// Alternating minimization of sum_i (u^T P_i v)^2 over unit u, v. The
/// value at u is the squared smallest singular value of [P_1 u | ... | P_M u].
inline AltMinResult alternating_minimization(const std::vector<EMat>& proj, EVec u, int max_iter = 200) {
    AltMinResult r;
    u.normalize();
    auto [lam, v] = min_eigenpair(proj, u);
    double prev = lam;
    for (int it = 0; it < max_iter; ++it) {
        auto [lu, nu] = min_eigenpair(proj, v);
        u = nu;
        auto [lv, nv] = min_eigenpair(proj, u);
        v = nv;
        lam = std::min(lu, lv);
        if (prev - lam <= 1e-15 * std::max(1.0, prev)) break;
        prev = lam;
    }
    r.u = u;
    r.v = v;
    // Recompute at the final u for a consistent residual.
    r.residual = std::sqrt(min_eigenpair(proj, u).first);
    r.v = min_eigenpair(proj, u).second;
    return r;
}

/// Best rational approximation with bounded denominator, if within tol.
inline std::optional<Rational> snap_rational(double x, double tol, long max_den) {
    if (!std::isfinite(x)) return std::nullopt;
    long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double r = x;
    for (int it = 0; it < 64; ++it) {
        const double af = std::floor(r);
        if (std::abs(af) > 1e15) break;
        const long a = static_cast<long>(af);
        const long h2 = a * h1 + h0;
        const long k2 = a * k1 + k0;
        if (k2 > max_den) break;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        if (std::abs(x - static_cast<double>(h1) / static_cast<double>(k1)) <= tol) return Rational(h1, k1);
        const double frac = r - af;
        if (frac < 1e-300) break;
        r = 1.0 / frac;
    }
    return std::nullopt;
}

/// Tries to turn an approximate rank-drop point u into an exact witness:
/// snap u to a nearby rational direction and solve for v exactly.
inline std::optional<WitnessPair<Rational>> exact_witness_near(const SubspaceFamily<Rational>& sf, const EVec& u) {
    const Eigen::Index n = u.size();
    Eigen::Index big = 0;
    u.cwiseAbs().maxCoeff(&big);
    const double scale = u(big);
    if (scale == 0.0) return std::nullopt;
    std::vector<Rational> uq(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        auto q = snap_rational(u(k) / scale, 1e-9, 10000);
        if (!q) return std::nullopt;
        uq[static_cast<std::size_t>(k)] = *q;
    }
    Matrix<Rational> rows(sf.size(), static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < sf.size(); ++i) {
        const auto pu = sf[i].projector() * std::span<const Rational>(uq);
        std::copy(pu.begin(), pu.end(), rows.row(i).begin());
    }
    const auto ns = null_space_basis(rows);
    if (ns.cols() == 0) return std::nullopt;
    auto w = polarized_pair(uq, ns.column(0));
    if (!verify_subspace_witness(sf, w, Tolerance{})) return std::nullopt;
    return w;
}

template <RealScalar T>
std::vector<T> from_double_vector(const std::vector<double>& v) {
    std::vector<T> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        if constexpr (ExactScalar<T>) {
            out[k] = rational_from_double(v[k]);
        } else {
            out[k] = v[k];
        }
    }
    return out;
}

/// Deterministic start directions: union vectors, then vectors orthogonal
/// to the non-spanning sides of the union's splits, then random points.
template <RealScalar T>
std::vector<std::vector<double>> search_starts(const VectorFamily<T>& union_family, std::size_t budget,
                                               std::uint64_t seed, const Context& ctx) {
    const std::size_t n = union_family.dim();
    std::vector<std::vector<double>> starts;
    const auto fu = to_float(union_family);
    for (std::size_t i = 0; i < fu.size() && starts.size() < budget / 4; ++i) {
        auto v = fu.vector(i);
        const double nv = norm2(v);
        if (nv == 0.0) continue;
        for (auto& x : v) x /= nv;
        starts.push_back(std::move(v));
    }
    const std::size_t m = union_family.size();
    if (m > 0 && m <= std::min<std::size_t>(ctx.max_scan, 20)) {
        RankOracle<T> oracle(union_family.rows(), ctx.tol);
        const Mask all = full_mask(m);
        for (std::size_t size = 1; size <= m && starts.size() < budget / 2; ++size) {
            for (Mask s : partition_representatives(m, size)) {
                if (starts.size() >= budget / 2) break;
                for (Mask side : {s, all & ~s}) {
                    if (side == 0 || oracle.rank_mask(side) >= n) continue;
                    const auto ns = null_space_basis(to_float(union_family.rows().select_rows(mask_indices(side))), ctx.tol);
                    if (ns.cols() == 0) continue;
                    auto v = ns.column(0);
                    const double nv = norm2(v);
                    for (auto& x : v) x /= nv;
                    starts.push_back(std::move(v));
                    break;
                }
            }
        }
    }
    for (std::size_t s = starts.size(); s < budget; ++s) {
        std::mt19937_64 rng(derive_seed(seed, s));
        starts.push_back(random_unit_vector(rng, n));
    }
    return starts;
}

template <RealScalar T>
bool all_one_dimensional(const SubspaceFamily<T>& sf) {
    return std::all_of(sf.subspaces().begin(), sf.subspaces().end(), [](const auto& s) { return s.dimension() == 1; });
}

template <RealScalar T>
bool contains_whole_space(const SubspaceFamily<T>& sf) {
    return std::any_of(sf.subspaces().begin(), sf.subspaces().end(),
                       [&](const auto& s) { return s.dimension() == sf.dim(); });
}

/// Whether the identity is a linear combination of the projectors; then
/// ||x||^2 is that combination of the measurements.
template <RealScalar T>
bool identity_in_projector_span(const SubspaceFamily<T>& sf, const Tolerance& tol) {
    const std::size_t n = sf.dim();
    const std::size_t entries = n * (n + 1) / 2;
    Matrix<T> rows(sf.size(), entries);
    for (std::size_t i = 0; i < sf.size(); ++i) {
        const auto& p = sf[i].projector();
        std::size_t k = 0;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = r; c < n; ++c) rows(i, k++) = p(r, c);
    }
    std::vector<T> id(entries, T(0));
    std::size_t k = 0;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = r; c < n; ++c) id[k++] = r == c ? T(1) : T(0);
    return span_contains(rows, std::span<const T>(id), tol);
}

}  // namespace detail

/// Phase retrieval by a real subspace family, in three stages:
/// (a) the union of stored bases must have the complement property (exact);
/// (b) a multistart search for a unit u with span{P_i u} deficient, which
///     gives an exactly or numerically verified failing pair;
/// (c) otherwise PASS_budgeted when the smallest residual seen stays above
///     10 * witness tolerance.
/// Families of lines reduce to vector phase retrieval and are decided exactly.
template <RealScalar T>
PRCertificate<T> pr_subspaces_real(const SubspaceFamily<T>& sf, std::size_t budget = 200, std::uint64_t seed = 0,
                                   const Context& ctx = {}) {
    PRCertificate<T> cert;
    const auto uni = onb_union(sf);
    const auto cp = check_complement_property(uni.vectors, ctx);
    cert.digest = cp.digest;
    if (!cp.holds) {
        cert.stage = "onb_union";
        cert.partition = cp.witness;
        auto w = witness_from_partition(uni.vectors, *cp.witness, ctx.tol);
        if (auto r = verify_subspace_witness(sf, w, ctx.tol)) {
            cert.decision = PrDecision::Fail;
            cert.witness = std::move(w);
            cert.witness_exact = ExactScalar<T>;
            cert.witness_residual = *r;
        } else {
            cert.decision = PrDecision::Inconclusive;
        }
        return cert;
    }
    if (sf.dim() <= 1 || detail::all_one_dimensional(sf)) {
        cert.stage = "lines";
        cert.decision = PrDecision::PassExact;
        return cert;
    }

    cert.stage = "search";
    cert.search_budget = budget;
    const auto proj = detail::float_projectors(sf);
    const auto starts = detail::search_starts(uni.vectors, budget, seed, ctx);
    double min_res = std::numeric_limits<double>::infinity();
    std::optional<WitnessPair<T>> numeric;
    double numeric_res = 0.0;
    ordered_scan(
        starts.size(), ctx.worker_count(),
        [&](std::size_t i) { return detail::alternating_minimization(proj, detail::to_evec(starts[i])); },
        [&](std::size_t, const detail::AltMinResult& r) {
            min_res = std::min(min_res, r.residual);
            if (r.residual > ctx.tol.witness) return true;
            if constexpr (ExactScalar<T>) {
                if (auto ex = detail::exact_witness_near(sf, r.u)) {
                    cert.witness = std::move(*ex);
                    cert.witness_exact = true;
                    cert.witness_residual = 0.0;
                    return false;
                }
            }
            if (!numeric) {
                auto w = detail::polarized_pair(detail::from_double_vector<T>(detail::from_evec(r.u)),
                                                detail::from_double_vector<T>(detail::from_evec(r.v)));
                const auto fw = WitnessPair<double>{to_float_vector(w.x), to_float_vector(w.y)};
                if (auto res = verify_subspace_witness(to_float(sf, ctx.tol), fw, ctx.tol)) {
                    numeric = std::move(w);
                    numeric_res = *res;
                    if constexpr (!ExactScalar<T>) return false;
                }
            }
            return true;
        });
    cert.min_residual = min_res;
    if (cert.witness) {
        cert.decision = PrDecision::Fail;
    } else if (numeric) {
        cert.decision = PrDecision::Fail;
        cert.witness = std::move(numeric);
        cert.witness_exact = false;
        cert.witness_residual = numeric_res;
    } else if (min_res > 10.0 * ctx.tol.witness) {
        cert.decision = PrDecision::PassBudgeted;
    } else {
        cert.decision = PrDecision::Inconclusive;
    }
    return cert;
}

namespace detail {

/// ||(I - Q_u) u|| where Q_u projects onto span{P_i u}; also returns the
/// residual vector.
inline std::pair<double, EVec> norm_gap(const std::vector<EMat>& proj, const EVec& u, double rank_tol) {
    const Eigen::Index n = u.size();
    EMat cols(n, static_cast<Eigen::Index>(proj.size()));
    for (std::size_t i = 0; i < proj.size(); ++i) cols.col(static_cast<Eigen::Index>(i)) = proj[i] * u;
    Eigen::JacobiSVD<EMat> svd(cols, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    const double cutoff = rank_tol * std::max(1.0, s.size() > 0 ? s(0) : 0.0);
    EVec r = u;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        if (s(k) <= cutoff) continue;
        const EVec q = svd.matrixU().col(k);
        r -= q * q.dot(u);
    }
    return {r.norm(), r};
}

}  // namespace detail

/// Norm retrieval by a real subspace family. The union of stored bases is
/// tested exactly first (subspace norm retrieval implies it for the union);
/// then a search for u outside span{P_i u}, which yields x, y with equal
/// projection norms and ||x||^2 - ||y||^2 = <u, v> for v = (I - Q_u)u.
template <RealScalar T>
PRCertificate<T> norm_retrieval_subspaces_real(const SubspaceFamily<T>& sf, std::size_t budget = 200,
                                               std::uint64_t seed = 0, const Context& ctx = {}) {
    const auto uni = onb_union(sf);
    auto base = norm_retrieval_vectors_real(uni.vectors, ctx);
    if (base.decision == PrDecision::Fail) {
        base.stage = "onb_union";
        if (auto r = verify_subspace_witness(sf, *base.witness, ctx.tol)) {
            base.witness_residual = *r;
            return base;
        }
        base.decision = PrDecision::Inconclusive;
        return base;
    }
    PRCertificate<T> cert;
    cert.digest = base.digest;
    if (detail::contains_whole_space(sf)) {
        cert.stage = "whole_space";
        cert.decision = PrDecision::PassExact;
        return cert;
    }
    if (detail::all_one_dimensional(sf)) {
        cert.stage = "lines";
        cert.decision = PrDecision::PassExact;
        return cert;
    }
    if (detail::identity_in_projector_span(sf, ctx.tol)) {
        cert.stage = "identity_in_span";
        cert.decision = PrDecision::PassExact;
        return cert;
    }
    cert.stage = "search";
    cert.search_budget = budget;
    const std::size_t n = sf.dim();
    const auto proj = detail::float_projectors(sf);
    const auto fsf = to_float(sf, ctx.tol);

    // Probes: directions orthogonal to every subspace in a group, where the
    // measurements of u lose rank.
    std::vector<std::vector<double>> starts;
    const std::size_t groups = sf.size() <= 12 ? (std::size_t{1} << sf.size()) : 4096;
    for (std::size_t g = 1; g < groups && starts.size() < budget / 2; ++g) {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < sf.size(); ++i)
            if ((g >> i) & 1U) {
                const auto& b = fsf[i].basis();
                for (std::size_t j = 0; j < b.cols(); ++j) rows.push_back(b.column(j));
            }
        const auto ns = null_space_basis(Matrix<double>::from_rows(rows, n), ctx.tol);
        if (ns.cols() == 0) continue;
        std::mt19937_64 rng(derive_seed(seed, 1'000'000 + g));
        const auto c = random_unit_vector(rng, ns.cols());
        auto v = ns * std::span<const double>(c);
        const double nv = norm2(v);
        for (auto& x : v) x /= nv;
        starts.push_back(std::move(v));
    }
    for (std::size_t s = starts.size(); s < budget; ++s) {
        std::mt19937_64 rng(derive_seed(seed, s));
        starts.push_back(random_unit_vector(rng, n));
    }

    struct Climb {
        double gap = 0.0;
        detail::EVec u;
        detail::EVec r;
    };
    double max_gap = 0.0;
    ordered_scan(
        starts.size(), ctx.worker_count(),
        [&](std::size_t i) {
            Climb best;
            best.u = detail::to_evec(starts[i]);
            std::tie(best.gap, best.r) = detail::norm_gap(proj, best.u, ctx.tol.rank);
            std::mt19937_64 rng(derive_seed(seed ^ 0xa5a5a5a5ULL, i));
            std::normal_distribution<double> gauss;
            double step = 0.3;
            for (int it = 0; it < 40; ++it) {
                detail::EVec cand = best.u;
                for (Eigen::Index k = 0; k < cand.size(); ++k) cand(k) += step * gauss(rng);
                cand.normalize();
                auto [g, r] = detail::norm_gap(proj, cand, ctx.tol.rank);
                if (g > best.gap) {
                    best = {g, cand, r};
                } else {
                    step *= 0.7;
                }
            }
            return best;
        },
        [&](std::size_t, const Climb& c) {
            max_gap = std::max(max_gap, c.gap);
            // <u, v> = ||v||^2 is the norm difference of the pair.
            if (c.gap * c.gap <= 10.0 * ctx.tol.witness) return true;
            const auto u = detail::from_evec(c.u);
            const auto v = detail::from_evec(c.r);
            WitnessPair<double> w = detail::polarized_pair(u, v);
            if (auto res = verify_subspace_witness(fsf, w, ctx.tol)) {
                cert.witness = WitnessPair<T>{detail::from_double_vector<T>(w.x), detail::from_double_vector<T>(w.y)};
                cert.witness_residual = *res;
                cert.decision = PrDecision::Fail;
                return false;
            }
            return true;
        });
    cert.max_norm_gap = max_gap;
    if (cert.decision != PrDecision::Fail) {
        cert.decision = max_gap * max_gap <= ctx.tol.witness ? PrDecision::PassBudgeted : PrDecision::Inconclusive;
    }
    return cert;
}

struct EquimodularBasis {
    /// Orthonormal basis of W as columns.
    Matrix<double> basis;
    /// 1: Px = +-Py; 2: <Px, Py> = 0; 3: general position.
    int proof_case = 1;
    double ortho_residual = 0.0;
    double equimodular_residual = 0.0;
};

/// Orthonormal basis {phi_j} of W with |<x, phi_j>| = |<y, phi_j>| for all j,
/// given ||Px|| = ||Py||.
inline EquimodularBasis equimodular_onb(const Subspace<double>& w, std::span<const double> x, std::span<const double> y,
                                        const Tolerance& tol = {}) {
    const std::size_t n = w.ambient_dim();
    if (x.size() != n || y.size() != n) throw FrameError(ErrorCode::DimensionMismatch, "x and y must live in the ambient space");
    const auto a = w.project(x);
    auto b = w.project(y);
    const double na = norm2(a);
    const double nb = norm2(b);
    if (std::abs(na - nb) > tol.witness * std::max(1.0, na)) {
        throw FrameError(ErrorCode::NormsDiffer, "||Px|| and ||Py|| differ");
    }
    if (nb > 0.0)
        for (auto& v : b) v *= na / nb;

    const std::size_t d = w.dimension();
    EquimodularBasis out;
    std::vector<std::vector<double>> chosen;
    auto diff_norm = [&](double sign) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += (a[k] - sign * b[k]) * (a[k] - sign * b[k]);
        return std::sqrt(s);
    };
    const double scale = std::max(1.0, na);
    if (d <= 1 || na <= tol.ortho * scale || std::min(diff_norm(1.0), diff_norm(-1.0)) <= tol.ortho * scale) {
        out.proof_case = 1;
    } else {
        const double ab = dot(a, b);
        out.proof_case = std::abs(ab) <= tol.ortho * scale * scale ? 2 : 3;
        const double sign = (out.proof_case == 2 || ab > 0.0) ? 1.0 : -1.0;
        for (double s : {1.0, -1.0}) {
            std::vector<double> phi(n);
            for (std::size_t k = 0; k < n; ++k) phi[k] = a[k] + s * sign * b[k];
            const double np = norm2(phi);
            for (auto& v : phi) v /= np;
            chosen.push_back(std::move(phi));
        }
    }
    // Complete with the stored basis, largest remaining component first.
    while (chosen.size() < d) {
        double best = -1.0;
        std::vector<double> pick;
        for (std::size_t j = 0; j < d; ++j) {
            auto v = w.basis().column(j);
            detail::subtract_projections(v, chosen);
            const double nv = norm2(v);
            if (nv > best) {
                best = nv;
                pick = std::move(v);
            }
        }
        for (auto& v : pick) v /= best;
        chosen.push_back(std::move(pick));
    }
    out.basis = Matrix<double>::from_columns(chosen, n);
    out.ortho_residual = max_abs_diff(out.basis.transpose() * out.basis, Matrix<double>::identity(d));
    for (const auto& phi : chosen) {
        const double r = std::abs(std::abs(dot<double>(x, std::span<const double>(phi))) -
                                  std::abs(dot<double>(y, std::span<const double>(phi))));
        out.equimodular_residual = std::max(out.equimodular_residual, r);
    }
    return out;
}

template <RealScalar T>
struct SpanningCheckReport {
    /// Norm retrieval of each per-subspace family inside its subspace.
    std::vector<PRCertificate<T>> per_subspace;
    bool premise_holds = true;
    std::optional<std::size_t> first_failed_subspace;
    /// Phase retrieval of the flattened family.
    PRCertificate<T> flattened;
};

/// For vectors chosen inside each subspace: checks norm retrieval within
/// each subspace, then phase retrieval of all vectors together.
template <RealScalar T>
SpanningCheckReport<T> norm_retrieval_spanning_check(const SubspaceFamily<T>& sf,
                                                     const std::vector<VectorFamily<T>>& per_subspace,
                                                     const Context& ctx = {}) {
    if (per_subspace.size() != sf.size()) {
        throw FrameError(ErrorCode::DimensionMismatch, "need one vector family per subspace");
    }
    SpanningCheckReport<T> rep;
    std::vector<std::vector<T>> flat;
    for (std::size_t i = 0; i < sf.size(); ++i) {
        const auto& w = sf[i];
        const auto& fam = per_subspace[i];
        if (fam.dim() != sf.dim()) throw FrameError(ErrorCode::DimensionMismatch, "vector family dimension differs");
        for (std::size_t j = 0; j < fam.size(); ++j) {
            if (!w.contains(fam[j], ctx.tol)) {
                throw FrameError(ErrorCode::VectorsOutsideSubspace,
                                 "vector " + std::to_string(j + 1) + " is not in subspace " + std::to_string(i + 1));
            }
            flat.push_back(fam.vector(j));
        }
        const Matrix<T>& b = w.basis();
        const Matrix<T> coords = fam.size() == 0 ? Matrix<T>(0, b.cols()) : fam.rows() * b;
        const Matrix<T> metric = b.transpose() * b;
        rep.per_subspace.push_back(detail::norm_retrieval_core(coords, metric, b, ctx));
        if (!rep.per_subspace.back().passed() && rep.premise_holds) {
            rep.premise_holds = false;
            rep.first_failed_subspace = i;
        }
    }
    rep.flattened = pr_vectors_real(VectorFamily<T>::from_vectors(sf.dim(), flat), ctx);
    return rep;
}

/// {T phi_i}.
template <Scalar T>
VectorFamily<T> apply_invertible(const VectorFamily<T>& f, const Matrix<T>& op, const Tolerance& tol = {}) {
    const std::size_t n = f.dim();
    if (op.rows() != n || op.cols() != n) throw FrameError(ErrorCode::DimensionMismatch, "operator must be N x N");
    if (rank(op, tol) < n) throw FrameError(ErrorCode::SingularOperator, "operator is not invertible");
    return {n, f.size() == 0 ? Matrix<T>(0, n) : f.rows() * op.transpose()};
}

/// {T W_i}, re-orthonormalized.
template <Scalar T>
SubspaceFamily<T> apply_invertible(const SubspaceFamily<T>& sf, const Matrix<T>& op, const Tolerance& tol = {}) {
    const std::size_t n = sf.dim();
    if (op.rows() != n || op.cols() != n) throw FrameError(ErrorCode::DimensionMismatch, "operator must be N x N");
    if (rank(op, tol) < n) throw FrameError(ErrorCode::SingularOperator, "operator is not invertible");
    std::vector<Subspace<T>> out;
    for (const auto& s : sf.subspaces()) out.push_back(Subspace<T>::span_of(n, (op * s.basis()).transpose(), tol));
    return {n, std::move(out)};
}

/// {P phi_i} in coordinates of range(P): inner products with the stored
/// basis of the range (orthonormal in float mode; in exact mode the
/// orthogonal basis, which differs from an orthonormal chart by a fixed
/// invertible diagonal scaling).
template <RealScalar T>
VectorFamily<T> project_family(const VectorFamily<T>& f, const Subspace<T>& p) {
    if (p.ambient_dim() != f.dim()) throw FrameError(ErrorCode::DimensionMismatch, "projection and family differ in dimension");
    const std::size_t r = p.dimension();
    if (f.size() == 0) return VectorFamily<T>(r);
    return {r, r == 0 ? Matrix<T>(f.size(), 0) : f.rows() * p.basis()};
}

/// ||P_{W_i} x||^2 for the six lines and planes of the standard 3-space example.
inline std::array<double, 6> johnsex_measurements(const std::array<double, 3>& x) {
    const double a = x[0], b = x[1], c = x[2];
    return {a * a + b * b, b * b, c * c, 0.5 * (a + b) * (a + b), 0.5 * (b + c) * (b + c), 0.5 * (a + c) * (a + c)};
}

struct NormReconstruction {
    /// Representative of {x, -x}: first nonzero coefficient positive.
    std::array<double, 3> x{};
    std::string branch;
};

/// Recovers +-x from the six squared projection norms.
inline NormReconstruction reconstruct_johnsex(const std::array<double, 6>& n, const Tolerance& tol = {}) {
    double scale = 1.0;
    for (double v : n) {
        if (!std::isfinite(v)) throw FrameError(ErrorCode::UnrealizableNorms, "non-finite measurement");
        scale = std::max(scale, std::abs(v));
    }
    const double slack = tol.witness * scale;
    for (double v : n)
        if (v < -slack) throw FrameError(ErrorCode::UnrealizableNorms, "negative squared norm");
    if (n[0] - n[1] < -slack) throw FrameError(ErrorCode::UnrealizableNorms, "||P1 x|| < ||P2 x||");

    const double zero = 16.0 * std::numeric_limits<double>::epsilon() * scale;
    const double a1sq = std::max(0.0, n[0] - n[1]);
    const double a2sq = std::max(0.0, n[1]);
    const double a3sq = std::max(0.0, n[2]);
    const bool z1 = a1sq <= zero, z2 = a2sq <= zero, z3 = a3sq <= zero;

    NormReconstruction r;
    if (int(z1) + int(z2) + int(z3) >= 2) {
        r.branch = "single_coefficient";
        r.x = {z1 ? 0.0 : std::sqrt(a1sq), z2 ? 0.0 : std::sqrt(a2sq), z3 ? 0.0 : std::sqrt(a3sq)};
    } else if (z1) {
        r.branch = "first_coefficient_zero";
        const double a2 = std::sqrt(a2sq);
        r.x = {0.0, a2, (2.0 * n[4] - n[1] - n[2]) / (2.0 * a2)};
    } else {
        r.branch = "first_coefficient_nonzero";
        const double a1 = std::sqrt(a1sq);
        r.x = {a1, (2.0 * n[3] - n[0]) / (2.0 * a1), (2.0 * n[5] + n[1] - n[0] - n[2]) / (2.0 * a1)};
    }
    const auto back = johnsex_measurements(r.x);
    for (std::size_t i = 0; i < 6; ++i) {
        if (std::abs(back[i] - n[i]) > slack) {
            throw FrameError(ErrorCode::UnrealizableNorms,
                             "measurement " + std::to_string(i + 1) + " is inconsistent with the others");
        }
    }
    return r;
}

}  // namespace framelab
