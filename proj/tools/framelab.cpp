// framelab: command-line certifiers for frames, phase retrieval and
// norm retrieval. Every command prints one JSON report on stdout.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "framelab/framelab.hpp"
#include "framelab/io.hpp"

namespace fl = framelab;
using fl::Json;

namespace {

enum class Exit : int { Holds = 0, Fails = 1, Usage = 2, Budgeted = 3 };

struct Options {
    bool exact = false;
    bool floating = false;
    double tol = 0.0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::optional<std::size_t> budget;
    bool force = false;
    bool pretty = false;
    std::string transform;
    bool timing = false;

    fl::Context context() const {
        fl::Context ctx;
        if (tol > 0.0) ctx.tol = fl::Tolerance::from_rank(tol);
        if (force) ctx.max_scan = 63;
        return ctx;
    }
    std::size_t budget_or(std::size_t fallback) const { return budget.value_or(fallback); }
    fl::SamplingOptions sampling() const {
        fl::SamplingOptions s;
        s.seed = seed;
        if (budget) s.budget = *budget;
        return s;
    }
};

enum class Mode { Exact, Float, ComplexFloat };

Mode pick_mode(const fl::RawInput& in, const Options& opt) {
    if (in.field == fl::Field::Complex) {
        if (opt.exact) throw fl::FrameError(fl::ErrorCode::ComplexNotSupported, "complex input has no exact mode");
        return Mode::ComplexFloat;
    }
    if (opt.exact) return Mode::Exact;
    if (opt.floating) return Mode::Float;
    return in.exact ? Mode::Exact : Mode::Float;
}

template <class F>
decltype(auto) visit_real(Mode m, F&& f) {
    if (m == Mode::ComplexFloat) {
        throw fl::FrameError(fl::ErrorCode::ComplexNotSupported, "this command handles real families only");
    }
    if (m == Mode::Exact) return f.template operator()<fl::Rational>();
    return f.template operator()<double>();
}

template <class F>
decltype(auto) visit_any(Mode m, F&& f) {
    if (m == Mode::ComplexFloat) return f.template operator()<fl::Complex>();
    return visit_real(m, std::forward<F>(f));
}

Exit exit_for(fl::PrDecision d) {
    switch (d) {
        case fl::PrDecision::PassExact: return Exit::Holds;
        case fl::PrDecision::Fail: return Exit::Fails;
        default: return Exit::Budgeted;
    }
}

Exit exit_for(fl::ErrorCode code) {
    switch (code) {
        case fl::ErrorCode::ParseError:
        case fl::ErrorCode::DimensionMismatch:
        case fl::ErrorCode::ZeroVector:
        case fl::ErrorCode::InvalidArgument:
        case fl::ErrorCode::ComplexNotSupported:
        case fl::ErrorCode::ScanTooLarge:
        case fl::ErrorCode::PreconditionRange:
        case fl::ErrorCode::NotSymmetric: return Exit::Usage;
        case fl::ErrorCode::CandidateBudgetExhausted:
        case fl::ErrorCode::ConstructionBudgetExhausted: return Exit::Budgeted;
        default: return Exit::Fails;
    }
}

template <class R>
Json enclosure_json(const fl::Enclosure<R>& e) {
    if (e.exact()) return fl::to_json(e.lo);
    return Json{{"lo", fl::to_json(e.lo)}, {"hi", fl::to_json(e.hi)}};
}

/// Command outcome: the command-specific part of the report and its exit.
struct Outcome {
    Json body = Json::object();
    Exit exit = Exit::Holds;
};

class Runner {
public:
    explicit Runner(const Options& opt) : opt_(opt), ctx_(opt.context()) {}

    fl::RawInput load(const std::string& path) const { return fl::parse_input(path); }

    /// Applies --transform to a real vector or subspace family.
    template <fl::RealScalar T>
    std::optional<fl::Matrix<T>> transform() const {
        if (opt_.transform.empty()) return std::nullopt;
        fl::ParseOptions po;
        po.allow_zero_rows = true;
        const auto raw = fl::parse_input(opt_.transform, po);
        const auto op = fl::as_vectors<T>(raw);
        if (op.size() != op.dim()) throw fl::FrameError(fl::ErrorCode::DimensionMismatch, "transform must be square");
        return op.rows();
    }

    template <fl::RealScalar T>
    fl::VectorFamily<T> vectors(const fl::RawInput& in) const {
        auto f = fl::as_vectors<T>(in);
        if (auto op = transform<T>()) f = fl::apply_invertible(f, *op, ctx_.tol);
        return f;
    }

    template <fl::RealScalar T>
    fl::SubspaceFamily<T> subspaces(const fl::RawInput& in) const {
        auto sf = fl::as_subspaces<T>(in, ctx_.tol);
        if (auto op = transform<T>()) sf = fl::apply_invertible(sf, *op, ctx_.tol);
        return sf;
    }

    Outcome analyze(const fl::RawInput& in) const {
        return visit_any(pick_mode(in, opt_), [&]<class T>() {
            const auto f = fl::as_vectors<T>(in);
            Outcome o;
            const auto b = fl::frame_bounds(f, ctx_.tol);
            o.body["is_frame"] = b.is_frame;
            o.body["lower_bound"] = enclosure_json(b.lower);
            o.body["upper_bound"] = enclosure_json(b.upper);
            o.body["parseval"] = fl::is_parseval(f, ctx_.tol);
            const bool riesz = f.size() == f.dim() && b.is_frame;
            o.body["riesz_basis"] = riesz;
            if (riesz) {
                const auto rb = fl::riesz_bounds(f, ctx_.tol);
                o.body["riesz_bounds"] = Json{{"lower", enclosure_json(rb.min_eig)}, {"upper", enclosure_json(rb.max_eig)}};
            }
            o.body["size"] = f.size();
            o.exit = b.is_frame ? Exit::Holds : Exit::Fails;
            return o;
        });
    }

    Outcome spark(const fl::RawInput& in) const {
        return visit_any(pick_mode(in, opt_), [&]<class T>() {
            const auto f = fl::as_vectors<T>(in);
            const auto r = fl::spark_report(f, ctx_);
            Outcome o;
            const bool full = f.size() >= f.dim() && r.spark == f.dim() + 1;
            o.body["spark"] = r.spark;
            o.body["full_spark"] = full;
            o.body["enumeration"] = fl::to_json(r.digest);
            if (r.dependent_subset) o.body["witness"] = Json{{"dependent_subset", fl::indices_json(*r.dependent_subset)}};
            o.exit = full ? Exit::Holds : Exit::Fails;
            return o;
        });
    }

    Outcome cp(const fl::RawInput& in) const {
        return visit_any(pick_mode(in, opt_), [&]<class T>() {
            const auto c = fl::check_complement_property(fl::as_vectors<T>(in), ctx_);
            Outcome o;
            o.body = fl::to_json(c);
            o.exit = c.holds ? Exit::Holds : Exit::Fails;
            return o;
        });
    }

    Outcome deficiency(const fl::RawInput& in) const {
        return visit_any(pick_mode(in, opt_), [&]<class T>() {
            const auto d = fl::complement_deficiency(fl::as_vectors<T>(in), ctx_);
            Outcome o;
            o.body["k"] = d.k;
            o.body["k_witness"] = fl::to_json(d.witness);
            o.body["min_additions"] = d.min_additions;
            if (d.min_additions_witness) o.body["min_additions_witness"] = fl::to_json(*d.min_additions_witness);
            o.body["enumeration"] = fl::to_json(d.digest);
            return o;
        });
    }

    Outcome pr_vectors(const fl::RawInput& in) const {
        const Mode m = pick_mode(in, opt_);
        if (m == Mode::ComplexFloat) {
            const auto c = fl::pr_vectors_complex_necessary(fl::as_vectors<fl::Complex>(in), ctx_);
            Outcome o;
            const bool fail = c.verdict == fl::ComplexVerdict::Fail;
            o.body["decision"] = fail ? "FAIL" : "INCONCLUSIVE";
            o.body["stage"] = "complement_property_necessary";
            o.body["complement_property"] = fl::to_json(c.complement_property);
            if (fail) o.body["witness"] = o.body["complement_property"]["witness"];
            o.exit = fail ? Exit::Fails : Exit::Budgeted;
            return o;
        }
        return visit_real(m, [&]<class T>() {
            const auto c = fl::pr_vectors_real(vectors<T>(in), ctx_);
            return Outcome{fl::to_json(c), exit_for(c.decision)};
        });
    }

    Outcome pr_subspaces(const fl::RawInput& in) {
        randomized_ = true;
        return visit_real(pick_mode(in, opt_), [&]<class T>() {
            const auto c = fl::pr_subspaces_real(subspaces<T>(in), opt_.budget_or(200), opt_.seed, ctx_);
            return Outcome{fl::to_json(c), exit_for(c.decision)};
        });
    }

    Outcome norm_retrieval(const fl::RawInput& in) {
        return visit_real(pick_mode(in, opt_), [&]<class T>() {
            fl::PRCertificate<T> c;
            if (in.kind == fl::InputKind::Subspaces) {
                randomized_ = true;
                c = fl::norm_retrieval_subspaces_real(subspaces<T>(in), opt_.budget_or(200), opt_.seed, ctx_);
            } else {
                c = fl::norm_retrieval_vectors_real(vectors<T>(in), ctx_);
            }
            return Outcome{fl::to_json(c), exit_for(c.decision)};
        });
    }

    Outcome naimark(const fl::RawInput& in, bool random) {
        if (random) randomized_ = true;
        std::optional<std::uint64_t> seed;
        if (random) seed.emplace(opt_.seed);
        auto finish = [&](const auto& f, const auto& nc) {
            const auto v = fl::verify_naimark_pair(f, nc.family, ctx_);
            Outcome o;
            o.body["complement"] = fl::to_json(nc.family);
            o.body["zero_complement"] = nc.zero_complement;
            if (!nc.conversion_note.empty()) o.body["note"] = nc.conversion_note;
            o.body["verification"] = Json{{"pass", v.pass},
                                          {"first_parseval", v.first_parseval},
                                          {"second_parseval", v.second_parseval},
                                          {"max_gram_residual", v.max_residual}};
            o.exit = v.pass ? Exit::Holds : Exit::Fails;
            return o;
        };
        switch (pick_mode(in, opt_)) {
            case Mode::ComplexFloat: {
                const auto f = fl::as_vectors<fl::Complex>(in);
                return finish(f, fl::naimark_complement(f, ctx_, seed));
            }
            case Mode::Exact: {
                const auto f = fl::as_vectors<fl::Rational>(in);
                return finish(fl::to_float(f), fl::naimark_complement(f, ctx_, seed));
            }
            default: {
                const auto f = fl::as_vectors<double>(in);
                return finish(f, fl::naimark_complement(f, ctx_, seed));
            }
        }
    }

    Outcome augment(const fl::RawInput& in) {
        randomized_ = true;
        return visit_real(pick_mode(in, opt_), [&]<class T>() {
            const auto r = fl::augment_to_cp(vectors<T>(in), opt_.sampling(), ctx_);
            Outcome o;
            o.body["added"] = fl::to_json(r.added);
            o.body["added_count"] = r.added.size();
            o.body["k"] = r.k;
            o.body["min_additions"] = r.min_additions;
            if (r.min_additions_witness) o.body["min_additions_witness"] = fl::to_json(*r.min_additions_witness);
            Json trace = Json::array();
            for (const auto& t : r.trace) {
                trace.push_back(Json{{"round", t.round},
                                     {"draws", t.draws},
                                     {"deficient_splits", t.deficient_splits},
                                     {"min_side_dim", t.min_side_dim},
                                     {"growth_bound", t.growth_bound}});
            }
            o.body["trace"] = trace;
            o.body["total_draws"] = r.total_draws;
            o.body["final_complement_property"] = fl::to_json(r.final_cp);
            o.exit = r.final_cp.holds ? Exit::Holds : Exit::Fails;
            return o;
        });
    }

    Outcome direct_sum(const fl::RawInput& a, const fl::RawInput& b) {
        randomized_ = true;
        const bool exact = opt_.exact || (!opt_.floating && a.exact && b.exact);
        return visit_real(exact ? Mode::Exact : Mode::Float, [&]<class T>() {
            try {
                const auto r = fl::direct_sum_augment(fl::as_vectors<T>(a), fl::as_vectors<T>(b), opt_.sampling(), ctx_);
                Outcome o;
                o.body["added"] = fl::to_json(r.added);
                o.body["added_count"] = r.added.size();
                o.body["combined"] = fl::to_json(r.combined);
                o.body["combined_complement_property"] = fl::to_json(r.combined_cp);
                o.body["total_draws"] = r.total_draws;
                o.exit = r.combined_cp.holds ? Exit::Holds : Exit::Fails;
                return o;
            } catch (const fl::PremiseFailedError& e) {
                Outcome o;
                o.body["error"] = Json{{"code", "PremiseFailed"}, {"message", e.what()}};
                if (e.partition()) o.body["witness"] = fl::to_json(*e.partition());
                o.exit = Exit::Fails;
                return o;
            }
        });
    }

    Outcome fsp_project(const fl::RawInput& in, std::size_t rank, bool dual_pair) {
        randomized_ = true;
        return visit_real(pick_mode(in, opt_), [&]<class T>() {
            const auto f = fl::as_vectors<T>(in);
            auto projection_json = [&](const fl::FullSparkProjection<T>& p) {
                return Json{{"range_basis", fl::rows_json(p.range.basis().transpose())},
                            {"projector", fl::rows_json(p.range.projector())},
                            {"rank", p.range.dimension()},
                            {"attempts", p.attempts},
                            {"seed_frame", fl::rows_json(p.seed_frame)},
                            {"full_spark_on_range", p.full_spark_on_range},
                            {"float_route_deviation", p.float_route_deviation}};
            };
            Outcome o;
            if (dual_pair) {
                const auto r = fl::dual_pair_projection(f, rank, opt_.sampling(), ctx_);
                o.body["projection"] = projection_json(r.projection);
                o.body["primal_phase_retrieval"] = fl::to_json(r.primal);
                o.body["dual_phase_retrieval"] = fl::to_json(r.dual);
                o.body["attempts"] = r.attempts;
                o.exit = r.primal.passed() && r.dual.passed() ? Exit::Holds : Exit::Fails;
            } else {
                const auto p = fl::construct_full_spark_projection(f, rank, opt_.sampling(), ctx_);
                o.body["projection"] = projection_json(p);
                if (p.range_pr) o.body["range_phase_retrieval"] = fl::to_json(*p.range_pr);
                o.exit = p.full_spark_on_range ? Exit::Holds : Exit::Fails;
            }
            return o;
        });
    }

    Outcome hyperplanes(const fl::RawInput& in, bool complete) {
        return visit_real(pick_mode(in, opt_), [&]<class T>() {
            Outcome o;
            auto scan_json = [](const fl::HyperplaneScan& s) {
                Json parts = Json::array();
                for (const auto& p : s.partitions) parts.push_back(fl::to_json(p));
                return Json{{"partitions", parts}, {"all_hyperplanes", s.all_hyperplanes}, {"enumeration", fl::to_json(s.digest)}};
            };
            auto blocked_json = [](const fl::BlockedReport& b) {
                Json j{{"blocked", b.blocked}};
                if (b.witness) j["witness"] = fl::to_json(*b.witness);
                return j;
            };
            if (in.kind == fl::InputKind::Subspaces) {
                const auto sf = subspaces<T>(in);
                const auto s = fl::hyperplane_partition_scan(sf, ctx_);
                o.body["scan"] = scan_json(s);
                o.body["blocked"] = blocked_json(fl::cp_blocked_forever(sf, ctx_));
                o.exit = s.all_hyperplanes ? Exit::Holds : Exit::Fails;
                return o;
            }
            const auto f = vectors<T>(in);
            const auto s = fl::hyperplane_partition_scan(f, ctx_);
            o.body["scan"] = scan_json(s);
            o.body["blocked"] = blocked_json(fl::cp_blocked_forever(f, ctx_));
            o.exit = s.all_hyperplanes ? Exit::Holds : Exit::Fails;
            if (complete) {
                randomized_ = true;
                try {
                    const auto c = fl::complete_hyperplane_family(f, opt_.sampling(), ctx_);
                    o.body["completion"] = Json{{"vector", fl::to_json(c.vector)},
                                                {"draws", c.draws},
                                                {"phase_retrieval", fl::to_json(c.pr)}};
                    o.exit = c.pr.passed() ? Exit::Holds : Exit::Fails;
                } catch (const fl::PremiseFailedError& e) {
                    o.body["error"] = Json{{"code", "PremiseFailed"}, {"message", e.what()}};
                    if (e.partition()) o.body["witness"] = fl::to_json(*e.partition());
                    o.exit = Exit::Fails;
                }
            }
            return o;
        });
    }

    Outcome reconstruct_demo(const std::vector<double>& given) {
        std::array<double, 3> x{};
        if (given.empty()) {
            randomized_ = true;
            std::mt19937_64 rng(opt_.seed);
            std::normal_distribution<double> gauss;
            for (auto& v : x) v = gauss(rng);
        } else {
            if (given.size() != 3) throw fl::FrameError(fl::ErrorCode::InvalidArgument, "--x takes three coordinates");
            std::copy(given.begin(), given.end(), x.begin());
        }
        const auto norms = fl::johnsex_measurements(x);
        const auto r = fl::reconstruct_johnsex(norms, ctx_.tol);
        double plus = 0.0, minus = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            plus = std::max(plus, std::abs(r.x[i] - x[i]));
            minus = std::max(minus, std::abs(r.x[i] + x[i]));
            scale = std::max(scale, std::abs(x[i]));
        }
        const double err = std::min(plus, minus);
        Outcome o;
        o.body["x"] = Json(std::vector<double>(x.begin(), x.end()));
        o.body["squared_norms"] = Json(std::vector<double>(norms.begin(), norms.end()));
        o.body["reconstruction"] = Json(std::vector<double>(r.x.begin(), r.x.end()));
        o.body["branch"] = r.branch;
        o.body["error_up_to_sign"] = err;
        o.exit = err <= 1e-8 * std::max(1.0, scale) ? Exit::Holds : Exit::Fails;
        return o;
    }

    Outcome paper_suite(const std::filesystem::path& dir) {
        Json results = Json::array();
        bool all_ok = true;
        auto record = [&](const std::string& name, const std::string& expected, const std::string& observed) {
            const bool ok = expected == observed;
            all_ok = all_ok && ok;
            results.push_back(Json{{"check", name}, {"expected", expected}, {"observed", observed}, {"ok", ok}});
        };
        auto file = [&](const char* name) { return fl::parse_input((dir / name).string()); };
        using Q = fl::Rational;

        {
            const auto f = fl::as_vectors<Q>(file("johnsex5.json"));
            const auto c = fl::check_complement_property(f, ctx_);
            std::string obs = c.holds ? "PASS" : "FAIL";
            if (c.witness) obs += " " + fl::indices_json(c.witness->subset).dump() + "|" + fl::indices_json(c.witness->complement).dump();
            record("johnsex5 complement property", "FAIL [1,5]|[2,3,4]", obs);
            const auto s = fl::hyperplane_partition_scan(f, ctx_);
            record("johnsex5 failing partitions span hyperplanes", "true", s.all_hyperplanes ? "true" : "false");
            const auto c0 = fl::complete_hyperplane_family(f, opt_.sampling(), ctx_);
            record("johnsex5 one added vector gives phase retrieval", "PASS_exact", std::string(fl::decision_name(c0.pr.decision)));
        }
        {
            const auto sf = fl::as_subspaces<Q>(file("johnsex_subspaces.json"), ctx_.tol);
            const auto c = fl::pr_subspaces_real(sf, opt_.budget_or(200), opt_.seed, ctx_);
            record("johnsex subspaces phase retrieval", "PASS_budgeted", std::string(fl::decision_name(c.decision)));
            const auto op = fl::as_vectors<Q>(fl::parse_input((dir / "johnsex2_operator.json").string(), {true}));
            const auto t = fl::pr_subspaces_real(fl::apply_invertible(sf, op.rows(), ctx_.tol), opt_.budget_or(200), opt_.seed, ctx_);
            record("johnsex2 transformed subspaces", "FAIL exact", std::string(fl::decision_name(t.decision)) + (t.witness_exact ? " exact" : " numeric"));
        }
        {
            const auto sf = fl::as_subspaces<Q>(file("johnsex_perp.json"), ctx_.tol);
            const auto n = fl::norm_retrieval_subspaces_real(sf, opt_.budget_or(200), opt_.seed, ctx_);
            record("orthogonal complements norm retrieval", "PASS_exact", std::string(fl::decision_name(n.decision)));
            const auto p = fl::pr_subspaces_real(sf, opt_.budget_or(200), opt_.seed, ctx_);
            record("orthogonal complements phase retrieval", "pass", p.passed() ? "pass" : "fail");
        }
        {
            const auto f = fl::as_vectors<Q>(file("six_in_r3.json"));
            record("six-vector family phase retrieval", "PASS_exact",
                   std::string(fl::decision_name(fl::pr_vectors_real(f, ctx_).decision)));
            record("six-vector family full spark", "false", fl::is_full_spark(f, ctx_) ? "true" : "false");
        }
        {
            const auto f = fl::as_vectors<Q>(file("full_spark_3in2.json"));
            record("three vectors in the plane phase retrieval", "PASS_exact",
                   std::string(fl::decision_name(fl::pr_vectors_real(f, ctx_).decision)));
        }
        {
            const auto f = fl::as_vectors<Q>(file("two_in_r2.json"));
            const auto r = fl::augment_to_cp(f, opt_.sampling(), ctx_);
            record("basis of the plane augmentation count", "1", std::to_string(r.added.size()));
        }
        {
            const fl::VectorFamily<Q> f(2, fl::Matrix<Q>{{1, 0}, {1, 1}});
            const auto p = fl::Subspace<Q>::span_of(2, fl::Matrix<Q>{{1, 0}});
            const auto q = p.orthogonal_complement(ctx_.tol);
            const auto a = fl::full_spark_projection_check(p, f, fl::BasisKind::Riesz, ctx_);
            const auto b = fl::full_spark_projection_check(q, f, fl::BasisKind::Riesz, ctx_);
            record("projected Riesz basis full spark on range", "true/false",
                   std::string(a.direct ? "true" : "false") + "/" + (b.direct ? "true" : "false"));
        }
        {
            const auto r = fl::reconstruct_johnsex(fl::johnsex_measurements({0.7, -1.3, 2.1}), ctx_.tol);
            const bool ok = std::abs(r.x[0] - 0.7) + std::abs(r.x[1] + 1.3) + std::abs(r.x[2] - 2.1) < 1e-8;
            record("reconstruction from six projection norms", "round trip", ok ? "round trip" : "mismatch");
        }
        Outcome o;
        o.body["results"] = results;
        o.body["all_ok"] = all_ok;
        o.exit = all_ok ? Exit::Holds : Exit::Fails;
        return o;
    }

    bool randomized() const { return randomized_; }

private:
    const Options& opt_;
    fl::Context ctx_;
    bool randomized_ = false;
};

int emit(const Json& report, const Options& opt, Exit code) {
    std::cout << (opt.pretty ? report.dump(2) : report.dump()) << '\n';
    return static_cast<int>(code);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certifiers for frames, complement property, phase retrieval and norm retrieval"};
    app.require_subcommand(1);
    Options opt;
    auto* exact_flag = app.add_flag("--exact", opt.exact, "Exact rational arithmetic");
    app.add_flag("--float", opt.floating, "Double precision arithmetic")->excludes(exact_flag);
    app.add_option("--tol", opt.tol, "Rank tolerance; orthogonality and witness tolerances scale as 0.1x and 10x")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", opt.seed, "Seed for randomized commands")->each([&](const std::string&) { opt.seed_given = true; });
    app.add_option("--budget", opt.budget, "Search starts or candidate draws");
    app.add_flag("--force", opt.force, "Allow exponential scans above 24 vectors");
    auto* pretty = app.add_flag("--pretty", opt.pretty, "Indented JSON");
    app.add_flag("--json", "Compact JSON (default)")->excludes(pretty);
    app.add_option("--transform", opt.transform, "Invertible operator applied to the input family first");
    app.add_flag("--timing", opt.timing, "Add wall-clock seconds to the report");
    app.fallthrough();

    std::string input, second, data_dir = "data";
    std::size_t rank = 0;
    bool dual_pair = false, complete = false, random_columns = false;
    std::vector<double> xs;

    auto one_input = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("input", input, "JSON or whitespace matrix file, '-' for stdin")->required();
        return sub;
    };
    auto* analyze = one_input("analyze", "Frame bounds, Parseval and Riesz checks");
    auto* spark = one_input("spark", "Spark and full spark");
    auto* cp = one_input("cp", "Complement property");
    auto* deficiency = one_input("deficiency", "Complement deficiency");
    auto* prv = one_input("pr-vectors", "Phase retrieval by vectors");
    auto* prs = one_input("pr-subspaces", "Phase retrieval by subspaces");
    auto* nr = one_input("norm-retrieval", "Norm retrieval by vectors or subspaces");
    auto* naimark = one_input("naimark", "Naimark complement of a Parseval frame");
    naimark->add_flag("--random", random_columns, "Complete with seeded random vectors");
    auto* augment = one_input("augment", "Add vectors until the complement property holds");
    auto* dsum = one_input("direct-sum", "Phase retrieval for the direct sum of two families");
    dsum->add_option("second", second, "Family in the second space")->required();
    auto* fsp = one_input("fsp-project", "Full-spark projection of a Riesz basis");
    fsp->add_option("--rank", rank, "Rank of the projection")->required();
    fsp->add_flag("--dual-pair", dual_pair, "Also require phase retrieval of the dual basis on the complement");
    auto* hyper = one_input("hyperplanes", "Partitions with two non-spanning sides");
    hyper->add_flag("--complete", complete, "Add one vector that restores phase retrieval");
    auto* demo = app.add_subcommand("reconstruct-demo", "Recover x from six projection norms");
    demo->add_option("--x", xs, "Three coordinates (random when omitted)")->delimiter(',');
    auto* suite = app.add_subcommand("paper-suite", "Run the bundled example families");
    suite->add_option("--data", data_dir, "Directory of fixture files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(Exit::Usage);
    }

    CLI::App* used = app.get_subcommands().front();
    Json report;
    report["command"] = used->get_name();
    const auto start = std::chrono::steady_clock::now();
    Runner run(opt);
    Outcome out;
    try {
        std::optional<fl::RawInput> in;
        if (used != demo && used != suite) {
            in = run.load(input);
            report["input"] = fl::echo_json(*in);
            report["input_digest"] = fl::input_digest(*in);
            report["arithmetic_mode"] = pick_mode(*in, opt) == Mode::Exact ? "exact" : "float";
        } else {
            report["arithmetic_mode"] = used == suite ? "exact" : "float";
        }
        if (!opt.transform.empty()) {
            const auto t = fl::parse_input(opt.transform, {true});
            report["transform"] = fl::echo_json(t);
        }
        if (used == analyze) out = run.analyze(*in);
        else if (used == spark) out = run.spark(*in);
        else if (used == cp) out = run.cp(*in);
        else if (used == deficiency) out = run.deficiency(*in);
        else if (used == prv) out = run.pr_vectors(*in);
        else if (used == prs) out = run.pr_subspaces(*in);
        else if (used == nr) out = run.norm_retrieval(*in);
        else if (used == naimark) {
            out = run.naimark(*in, random_columns);
            report["arithmetic_mode"] = "float";
        } else if (used == augment) out = run.augment(*in);
        else if (used == dsum) {
            const auto b = run.load(second);
            report["second_input"] = fl::echo_json(b);
            report["second_input_digest"] = fl::input_digest(b);
            out = run.direct_sum(*in, b);
        } else if (used == fsp) out = run.fsp_project(*in, rank, dual_pair);
        else if (used == hyper) out = run.hyperplanes(*in, complete);
        else if (used == demo) out = run.reconstruct_demo(xs);
        else out = run.paper_suite(data_dir);
    } catch (const fl::FrameError& e) {
        std::cerr << "framelab: " << e.what() << '\n';
        out.body = Json::object();
        out.body["error"] = Json{{"code", std::string(fl::error_name(e.code())), }, {"message", e.what()}};
        out.exit = exit_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "framelab: " << e.what() << '\n';
        out.body = Json::object();
        out.body["error"] = Json{{"code", "InternalError"}, {"message", e.what()}};
        out.exit = Exit::Fails;
    }
    for (auto& [k, v] : out.body.items()) report[k] = v;
    if (run.randomized() || opt.seed_given) report["seed"] = opt.seed;
    if (opt.timing) {
        report["timing_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    report["exit_code"] = static_cast<int>(out.exit);
    return emit(report, opt, out.exit);
}
