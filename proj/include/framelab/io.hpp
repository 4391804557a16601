#pragma once

// Reading vector and subspace families from JSON or whitespace text, the
// canonical echo used for input digests, and JSON forms of results.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "framelab/frame.hpp"
#include "framelab/phase_retrieval.hpp"
#include "framelab/spark.hpp"

namespace framelab {

using Json = nlohmann::json;

/// One coordinate as read. Real entries always carry an exact value: "p/q"
/// strings and integers directly, other numbers through their shortest
/// round-trip decimal text.
struct Entry {
    std::optional<Rational> exact;
    Complex value;
    bool fractional = false;
};

enum class InputKind { Vectors, Subspaces };

struct RawInput {
    InputKind kind = InputKind::Vectors;
    Field field = Field::Real;
    std::size_t dim = 0;
    /// Every entry was an integer or a rational string, or a string forced it.
    bool exact = false;
    std::vector<std::vector<Entry>> vectors;
    std::vector<std::vector<std::vector<Entry>>> subspaces;
};

struct ParseOptions {
    /// Operators may have zero rows; families may not.
    bool allow_zero_rows = false;
};

namespace detail {

inline FrameError parse_error(const std::string& where, const std::string& what) {
    return FrameError(ErrorCode::ParseError, where + ": " + what);
}

inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

/// The rational written by the shortest round-trip decimal of d.
inline Rational decimal_rational(double d) {
    const std::string s = Json(d).dump();
    const auto e = s.find_first_of("eE");
    if (e == std::string::npos) return parse_rational(s);
    Rational q = parse_rational(s.substr(0, e));
    const long exp = std::stol(s.substr(e + 1));
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp)));
    if (exp >= 0) q *= Rational(p);
    else q /= Rational(p);
    return q;
}

struct EntryScan {
    bool saw_string = false;
    bool saw_float = false;
    bool saw_pair = false;
};

inline Entry parse_entry(const Json& j, const std::string& path, EntryScan& scan) {
    Entry e;
    if (j.is_number_integer() || j.is_number_unsigned()) {
        e.exact = j.is_number_unsigned() ? Rational(mpz_class(std::to_string(j.get<std::uint64_t>())))
                                         : Rational(mpz_class(std::to_string(j.get<std::int64_t>())));
        e.value = e.exact->get_d();
    } else if (j.is_number_float()) {
        scan.saw_float = true;
        const double d = j.get<double>();
        if (!std::isfinite(d)) throw parse_error(path, "non-finite entry");
        e.exact = decimal_rational(d);
        e.value = d;
        e.fractional = true;
    } else if (j.is_string()) {
        scan.saw_string = true;
        try {
            e.exact = parse_rational(j.get<std::string>());
        } catch (const FrameError& err) {
            throw parse_error(path, err.what());
        }
        e.value = e.exact->get_d();
        e.fractional = true;
    } else if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        scan.saw_pair = true;
        e.value = Complex(j[0].get<double>(), j[1].get<double>());
    } else {
        throw parse_error(path, "expected a number, a \"p/q\" string or a [re, im] pair");
    }
    return e;
}

inline std::vector<std::vector<Entry>> parse_rows(const Json& rows, const std::string& path, std::size_t& dim,
                                                  bool dim_given, EntryScan& scan) {
    if (!rows.is_array()) throw parse_error(path, "expected an array of vectors");
    std::vector<std::vector<Entry>> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string rp = path + "/" + std::to_string(i);
        const Json& row = rows[i];
        if (!row.is_array()) throw parse_error(rp, "expected an array of coordinates");
        if (!dim_given && dim == 0 && out.empty()) dim = row.size();
        if (row.size() != dim) {
            if (dim_given) {
                throw FrameError(ErrorCode::DimensionMismatch,
                                 rp + ": vector has " + std::to_string(row.size()) + " entries, dim is " +
                                     std::to_string(dim));
            }
            throw parse_error(rp, "ragged rows (" + std::to_string(row.size()) + " entries, expected " +
                                      std::to_string(dim) + ")");
        }
        std::vector<Entry> v;
        v.reserve(row.size());
        for (std::size_t k = 0; k < row.size(); ++k) v.push_back(parse_entry(row[k], rp + "/" + std::to_string(k), scan));
        out.push_back(std::move(v));
    }
    return out;
}

inline bool is_zero_row(const std::vector<Entry>& row) {
    return std::all_of(row.begin(), row.end(), [](const Entry& e) { return e.value == Complex(0.0, 0.0); });
}

inline std::string read_all(std::istream& in) {
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

inline RawInput parse_json_input(const std::string& text, const ParseOptions& opt = {}) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        const auto [line, col] = detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1);
        throw FrameError(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(col) +
                                                    ": malformed JSON");
    }
    RawInput in;
    detail::EntryScan scan;
    bool dim_given = false;
    bool field_complex = false;
    const Json* vectors = nullptr;
    const Json* subspaces = nullptr;
    if (doc.is_array()) {
        vectors = &doc;
    } else if (doc.is_object()) {
        if (doc.contains("field")) {
            const Json& f = doc["field"];
            if (!f.is_string() || (f != "real" && f != "complex")) {
                throw detail::parse_error("/field", "expected \"real\" or \"complex\"");
            }
            field_complex = f == "complex";
        }
        if (doc.contains("dim")) {
            if (!doc["dim"].is_number_unsigned()) throw detail::parse_error("/dim", "expected a non-negative integer");
            in.dim = doc["dim"].get<std::size_t>();
            dim_given = true;
        }
        if (doc.contains("vectors")) vectors = &doc["vectors"];
        else if (doc.contains("operator")) vectors = &doc["operator"];
        if (doc.contains("subspaces")) subspaces = &doc["subspaces"];
        if ((vectors == nullptr) == (subspaces == nullptr)) {
            throw detail::parse_error("/", "expected exactly one of \"vectors\" or \"subspaces\"");
        }
    } else {
        throw detail::parse_error("/", "expected an object or an array");
    }

    if (vectors) {
        in.kind = InputKind::Vectors;
        const std::string path = doc.is_array() ? "" : (doc.contains("vectors") ? "/vectors" : "/operator");
        in.vectors = detail::parse_rows(*vectors, path, in.dim, dim_given, scan);
        if (in.vectors.empty()) throw detail::parse_error(path.empty() ? "/" : path, "no vectors");
        if (!opt.allow_zero_rows) {
            for (std::size_t i = 0; i < in.vectors.size(); ++i)
                if (detail::is_zero_row(in.vectors[i]))
                    throw FrameError(ErrorCode::ZeroVector, "vector " + std::to_string(i + 1) + " is zero");
        }
    } else {
        in.kind = InputKind::Subspaces;
        if (!subspaces->is_array() || subspaces->empty()) throw detail::parse_error("/subspaces", "expected a non-empty array");
        for (std::size_t i = 0; i < subspaces->size(); ++i) {
            const std::string sp = "/subspaces/" + std::to_string(i);
            const Json& s = (*subspaces)[i];
            const Json* basis = nullptr;
            if (s.is_object() && s.contains("basis")) basis = &s["basis"];
            else if (s.is_array()) basis = &s;
            if (!basis) throw detail::parse_error(sp, "expected {\"basis\": [...]}");
            const bool have_dim = dim_given || i > 0;
            auto rows = detail::parse_rows(*basis, sp + "/basis", in.dim, have_dim, scan);
            if (rows.empty() || std::all_of(rows.begin(), rows.end(), detail::is_zero_row)) {
                throw FrameError(ErrorCode::ZeroVector, "subspace " + std::to_string(i + 1) + " has an empty basis");
            }
            in.subspaces.push_back(std::move(rows));
        }
    }

    in.field = field_complex || scan.saw_pair ? Field::Complex : Field::Real;
    if (in.field == Field::Complex) {
        if (in.kind == InputKind::Subspaces) {
            throw FrameError(ErrorCode::ComplexNotSupported, "subspace families are real only");
        }
        for (auto& row : in.vectors)
            for (auto& e : row) e.exact.reset();
        in.exact = false;
    } else {
        in.exact = scan.saw_string || !scan.saw_float;
    }
    return in;
}

/// Whitespace-separated rows, one vector per line; '#' starts a comment.
inline RawInput parse_text_input(const std::string& text, const ParseOptions& opt = {}) {
    RawInput in;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string line = text.substr(pos, end - pos);
        ++line_no;
        pos = end + 1;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::vector<Entry> row;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            if (i >= line.size()) break;
            std::size_t j = i;
            while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
            const std::string tok = line.substr(i, j - i);
            double d = 0.0;
            const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), d);
            if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || !std::isfinite(d)) {
                throw FrameError(ErrorCode::ParseError, "line " + std::to_string(line_no) + ", column " +
                                                            std::to_string(i + 1) + ": bad number '" + tok + "'");
            }
            Entry e;
            e.value = d;
            e.exact = detail::decimal_rational(d);
            e.fractional = true;
            row.push_back(std::move(e));
            i = j;
        }
        if (row.empty()) continue;
        if (in.vectors.empty()) in.dim = row.size();
        if (row.size() != in.dim) {
            throw FrameError(ErrorCode::ParseError, "line " + std::to_string(line_no) + ", column 1: ragged row (" +
                                                        std::to_string(row.size()) + " entries, expected " +
                                                        std::to_string(in.dim) + ")");
        }
        if (!opt.allow_zero_rows && detail::is_zero_row(row)) {
            throw FrameError(ErrorCode::ZeroVector, "line " + std::to_string(line_no) + ": zero vector");
        }
        in.vectors.push_back(std::move(row));
    }
    if (in.vectors.empty()) throw FrameError(ErrorCode::ParseError, "line 1, column 1: no vectors");
    in.exact = false;
    return in;
}

inline RawInput parse_input_text(const std::string& text, const ParseOptions& opt = {}) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) throw FrameError(ErrorCode::ParseError, "line 1, column 1: empty input");
    if (text[first] == '{' || text[first] == '[') return parse_json_input(text, opt);
    return parse_text_input(text, opt);
}

/// Reads a file, or standard input for "-".
inline RawInput parse_input(const std::string& path, const ParseOptions& opt = {}) {
    std::string text;
    if (path == "-") {
        text = detail::read_all(std::cin);
    } else {
        std::ifstream file(path, std::ios::binary);
        if (!file) throw FrameError(ErrorCode::ParseError, "cannot open '" + path + "'");
        text = detail::read_all(file);
    }
    return parse_input_text(text, opt);
}

namespace detail {

template <Scalar T>
T entry_as(const Entry& e) {
    if constexpr (std::is_same_v<T, Rational>) {
        if (!e.exact) throw FrameError(ErrorCode::ComplexNotSupported, "complex entries have no exact form");
        return *e.exact;
    } else if constexpr (std::is_same_v<T, double>) {
        if (e.value.imag() != 0.0) throw FrameError(ErrorCode::ComplexNotSupported, "complex entry in a real family");
        return e.value.real();
    } else {
        return e.value;
    }
}

template <Scalar T>
Matrix<T> rows_as(const std::vector<std::vector<Entry>>& rows, std::size_t dim) {
    Matrix<T> m(rows.size(), dim);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < dim; ++j) m(i, j) = entry_as<T>(rows[i][j]);
    return m;
}

}  // namespace detail

template <Scalar T>
VectorFamily<T> as_vectors(const RawInput& in) {
    if (in.kind != InputKind::Vectors) throw FrameError(ErrorCode::InvalidArgument, "input holds subspaces, not vectors");
    return {in.dim, detail::rows_as<T>(in.vectors, in.dim)};
}

template <RealScalar T>
SubspaceFamily<T> as_subspaces(const RawInput& in, const Tolerance& tol = {}) {
    if (in.kind != InputKind::Subspaces) throw FrameError(ErrorCode::InvalidArgument, "input holds vectors, not subspaces");
    std::vector<Subspace<T>> subs;
    for (const auto& basis : in.subspaces) subs.push_back(Subspace<T>::span_of(in.dim, detail::rows_as<T>(basis, in.dim), tol));
    return {in.dim, std::move(subs)};
}

// ---------------------------------------------------------------------------
// JSON output

inline Json to_json(const Rational& q) {
    if (q.get_den() == 1 && q.get_num().fits_slong_p()) return Json(q.get_num().get_si());
    return Json(q.get_str(10));
}
inline Json to_json(double x) { return Json(x); }
inline Json to_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

template <Scalar T>
Json to_json(std::span<const T> v) {
    Json a = Json::array();
    for (const auto& x : v) a.push_back(to_json(x));
    return a;
}

template <Scalar T>
Json to_json(const std::vector<T>& v) {
    return to_json(std::span<const T>(v));
}

template <Scalar T>
Json rows_json(const Matrix<T>& m) {
    Json a = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) a.push_back(to_json(m.row(i)));
    return a;
}

template <Scalar T>
Json to_json(const VectorFamily<T>& f) {
    return Json{{"field", f.field() == Field::Complex ? "complex" : "real"}, {"dim", f.dim()}, {"vectors", rows_json(f.rows())}};
}

template <RealScalar T>
Json to_json(const SubspaceFamily<T>& sf) {
    Json subs = Json::array();
    for (const auto& s : sf.subspaces()) subs.push_back(Json{{"basis", rows_json(s.basis().transpose())}});
    return Json{{"field", "real"}, {"dim", sf.dim()}, {"subspaces", subs}};
}

/// 1-based index list.
inline Json indices_json(const std::vector<std::size_t>& idx) {
    Json a = Json::array();
    for (auto i : idx) a.push_back(i + 1);
    return a;
}

inline Json to_json(const EnumerationDigest& d) { return Json{{"checked", d.checked}, {"pruned", d.pruned}}; }

inline Json to_json(const PartitionCertificate& p) {
    return Json{{"subset", indices_json(p.subset)},
                {"complement", indices_json(p.complement)},
                {"dim_subset", p.dim_subset},
                {"dim_complement", p.dim_complement},
                {"verdict", p.verdict == PartitionVerdict::BothDeficient ? "both_deficient" : "spanning"}};
}

template <class U>
Json optional_json(const std::optional<U>& v) {
    return v ? to_json(*v) : Json(nullptr);
}

inline Json to_json(const CpCertificate& c) {
    Json j{{"holds", c.holds}, {"mode", std::string(c.mode)}, {"enumeration", to_json(c.digest)}};
    if (c.witness) j["witness"] = to_json(*c.witness);
    return j;
}

template <Scalar T>
Json to_json(const WitnessPair<T>& w) {
    return Json{{"x", to_json(w.x)}, {"y", to_json(w.y)}};
}

template <Scalar T>
Json to_json(const PRCertificate<T>& c) {
    Json j{{"decision", std::string(decision_name(c.decision))},
           {"mode", std::string(c.mode)},
           {"stage", c.stage},
           {"enumeration", to_json(c.digest)}};
    if (c.partition) j["partition"] = to_json(*c.partition);
    if (c.witness) {
        j["witness"] = to_json(*c.witness);
        j["witness_exact"] = c.witness_exact;
        j["witness_residual"] = c.witness_residual;
    }
    if (c.search_budget > 0) j["search_budget"] = c.search_budget;
    if (c.min_residual) j["min_residual"] = *c.min_residual;
    if (c.max_norm_gap) j["max_norm_gap"] = *c.max_norm_gap;
    return j;
}

// ---------------------------------------------------------------------------
// Echo and digest

/// Canonical JSON of the parsed input; parsing this echo reproduces it.
inline Json echo_json(const RawInput& in) {
    auto entry = [&](const Entry& e) -> Json {
        if (in.field == Field::Complex) return to_json(e.value);
        if (in.exact) return to_json(*e.exact);
        return Json(e.value.real());
    };
    auto rows = [&](const std::vector<std::vector<Entry>>& rs) {
        Json a = Json::array();
        for (const auto& r : rs) {
            Json row = Json::array();
            for (const auto& e : r) row.push_back(entry(e));
            a.push_back(std::move(row));
        }
        return a;
    };
    Json j{{"field", in.field == Field::Complex ? "complex" : "real"}, {"dim", in.dim}};
    if (in.kind == InputKind::Vectors) {
        j["vectors"] = rows(in.vectors);
    } else {
        Json subs = Json::array();
        for (const auto& b : in.subspaces) subs.push_back(Json{{"basis", rows(b)}});
        j["subspaces"] = subs;
    }
    return j;
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// FNV-1a 64 of the compact canonical echo.
inline std::string input_digest(const RawInput& in) { return hex64(fnv1a64(echo_json(in).dump())); }

}  // namespace framelab
