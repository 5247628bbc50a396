#include "tileforge/json_io.hpp"

#include "tileforge/error.hpp"

#include <cmath>

namespace tileforge {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::invalid_input, what); }

std::int64_t as_int(const json& v, const std::string& field)
{
    if (v.is_number_integer())
        return v.get<std::int64_t>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15)
            return static_cast<std::int64_t>(d);
    }
    bad(field + ": expected an integer");
}

double as_real(const json& v, const std::string& field)
{
    if (!v.is_number())
        bad(field + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d))
        bad(field + ": not finite");
    return d;
}

bool all_integers(const json& v)
{
    if (v.is_array()) {
        for (const auto& x : v)
            if (!all_integers(x))
                return false;
        return true;
    }
    if (v.is_number_integer())
        return true;
    if (v.is_number_float()) {
        const double d = v.get<double>();
        return std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15;
    }
    return false;
}

std::vector<std::vector<json>> rows_of(const json& v, const std::string& field)
{
    if (!v.is_array() || v.empty())
        bad(field + ": expected a nonempty array of rows");
    std::vector<std::vector<json>> out;
    for (const auto& row : v) {
        if (!row.is_array() || row.empty())
            bad(field + ": every row must be a nonempty array");
        out.emplace_back(row.begin(), row.end());
    }
    return out;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed)
{
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            ok = ok || it.key() == a;
        if (!ok)
            bad("unexpected field '" + it.key() + "'");
    }
}

} // namespace

IntSystem ProblemSpec::int_data() const
{
    switch (kind) {
    case ProblemKind::attractor:
        if (!int_system)
            bad("this command needs integer matrix and shifts");
        return *int_system;
    case ProblemKind::boxform:
        return {build_cyclic_matrix(*form), box_digits(*form)};
    case ProblemKind::oned:
        return to_attractor_system(*set);
    }
    bad("unknown kind");
}

RealSystem ProblemSpec::real_data() const
{
    if (kind == ProblemKind::attractor && real_system)
        return *real_system;
    return to_real(int_data());
}

std::size_t ProblemSpec::dim() const
{
    switch (kind) {
    case ProblemKind::attractor:
        return int_system ? int_system->matrix.dim() : static_cast<std::size_t>(real_system->matrix.rows());
    case ProblemKind::boxform:
        return form->p.size();
    case ProblemKind::oned:
        return 1;
    }
    return 0;
}

ProblemSpec parse_problem(const json& j)
{
    if (!j.is_object())
        bad("problem must be a JSON object");
    if (!j.contains("kind") || !j["kind"].is_string())
        bad("kind: required string");
    ProblemSpec spec;
    const std::string kind = j["kind"].get<std::string>();

    if (kind == "attractor") {
        check_keys(j, {"kind", "matrix", "digits", "shifts", "params", "translates"});
        if (!j.contains("matrix"))
            bad("matrix: required for kind attractor");
        if (j.contains("digits") == j.contains("shifts"))
            bad("exactly one of digits or shifts is required for kind attractor");
        const bool digits = j.contains("digits");
        const json& sv = digits ? j["digits"] : j["shifts"];
        const std::string sname = digits ? "digits" : "shifts";
        const auto mrows = rows_of(j["matrix"], "matrix");
        const auto srows = rows_of(sv, sname);
        const std::size_t d = mrows.size();
        for (const auto& r : mrows)
            if (r.size() != d)
                bad("matrix: must be square");
        for (const auto& r : srows)
            if (r.size() != d)
                bad(sname + ": every vector must have dimension " + std::to_string(d));
        spec.kind = ProblemKind::attractor;
        if (all_integers(j["matrix"]) && all_integers(sv)) {
            std::vector<std::vector<std::int64_t>> m;
            for (const auto& r : mrows) {
                m.emplace_back();
                for (const auto& x : r)
                    m.back().push_back(as_int(x, "matrix"));
            }
            IntSystem sys{IntMatrix::from_rows(m), {}};
            for (const auto& r : srows) {
                IntVec v;
                for (const auto& x : r)
                    v.push_back(as_int(x, sname));
                sys.shifts.push_back(std::move(v));
            }
            if (det(sys.matrix) == 0)
                throw Error(ErrorCode::singular, "matrix: singular");
            if (!is_expanding(sys.matrix))
                throw Error(ErrorCode::not_expanding, "matrix: not expanding");
            if (digits && !validate_digits(sys.matrix, sys.shifts))
                bad("digits: not a residue system modulo the matrix containing 0");
            spec.residue_digits = digits;
            spec.int_system = std::move(sys);
        } else {
            if (digits)
                bad("digits: must be integers (use shifts for real data)");
            RealSystem sys{Eigen::MatrixXd(d, d), {}};
            for (std::size_t r = 0; r < d; ++r)
                for (std::size_t c = 0; c < d; ++c)
                    sys.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = as_real(mrows[r][c], "matrix");
            for (const auto& r : srows) {
                Eigen::VectorXd v(d);
                for (std::size_t c = 0; c < d; ++c)
                    v[static_cast<Eigen::Index>(c)] = as_real(r[c], sname);
                sys.shifts.push_back(std::move(v));
            }
            if (!is_expanding(sys.matrix))
                throw Error(ErrorCode::not_expanding, "matrix: not expanding");
            spec.real_system = std::move(sys);
        }
    } else if (kind == "boxform") {
        check_keys(j, {"kind", "p", "sign", "params", "translates"});
        if (!j.contains("p") || !j["p"].is_array() || j["p"].empty())
            bad("p: required nonempty integer array");
        BoxForm f;
        for (const auto& x : j["p"])
            f.p.push_back(as_int(x, "p"));
        f.sign = j.contains("sign") ? static_cast<int>(as_int(j["sign"], "sign")) : 1;
        validate(f);
        spec.kind = ProblemKind::boxform;
        spec.form = f;
    } else if (kind == "oned") {
        check_keys(j, {"kind", "set", "params", "translates"});
        if (!j.contains("set") || !j["set"].is_array())
            bad("set: required integer array");
        IntSet1D y;
        for (const auto& x : j["set"])
            y.push_back(as_int(x, "set"));
        check_set(y);
        spec.kind = ProblemKind::oned;
        spec.set = y;
    } else {
        bad("kind: must be attractor, boxform or oned");
    }

    if (j.contains("params")) {
        const json& p = j["params"];
        if (!p.is_object())
            bad("params: expected an object");
        check_keys(p, {"depth", "resolution", "tolerance"});
        if (p.contains("depth")) {
            const auto v = as_int(p["depth"], "params.depth");
            if (v < 1 || v > 64)
                bad("params.depth: must be in [1, 64]");
            spec.params.depth = static_cast<int>(v);
        }
        if (p.contains("resolution")) {
            const auto v = as_int(p["resolution"], "params.resolution");
            if (v < 1 || v > 1 << 16)
                bad("params.resolution: must be in [1, 65536]");
            spec.params.resolution = static_cast<int>(v);
        }
        if (p.contains("tolerance")) {
            const double t = as_real(p["tolerance"], "params.tolerance");
            if (!(t > 0.0 && t < 1.0))
                bad("params.tolerance: must be in (0, 1)");
            spec.params.tolerance = t;
        }
    }
    if (j.contains("translates")) {
        const std::size_t d = spec.dim();
        for (const auto& r : rows_of(j["translates"], "translates")) {
            if (r.size() != d)
                bad("translates: every vector must have dimension " + std::to_string(d));
            IntVec v;
            for (const auto& x : r)
                v.push_back(as_int(x, "translates"));
            spec.translates.push_back(std::move(v));
        }
    }
    return spec;
}

ProblemSpec parse_problem_text(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        bad(std::string("malformed JSON: ") + e.what());
    }
    return parse_problem(j);
}

json problem_to_json(const ProblemSpec& spec)
{
    json j;
    switch (spec.kind) {
    case ProblemKind::attractor:
        j["kind"] = "attractor";
        if (spec.int_system) {
            j["matrix"] = to_json(spec.int_system->matrix);
            j[spec.residue_digits ? "digits" : "shifts"] = to_json(spec.int_system->shifts);
        } else {
            j["matrix"] = to_json(spec.real_system->matrix);
            json s = json::array();
            for (const auto& v : spec.real_system->shifts)
                s.push_back(std::vector<double>(v.data(), v.data() + v.size()));
            j["shifts"] = s;
        }
        break;
    case ProblemKind::boxform:
        j["kind"] = "boxform";
        j["p"] = spec.form->p;
        j["sign"] = spec.form->sign;
        break;
    case ProblemKind::oned:
        j["kind"] = "oned";
        j["set"] = *spec.set;
        break;
    }
    json params = json::object();
    if (spec.params.depth)
        params["depth"] = *spec.params.depth;
    if (spec.params.resolution)
        params["resolution"] = *spec.params.resolution;
    if (spec.params.tolerance != kBoxTolerance)
        params["tolerance"] = spec.params.tolerance;
    if (!params.empty())
        j["params"] = params;
    if (!spec.translates.empty())
        j["translates"] = to_json(spec.translates);
    return j;
}

json to_json(const IntMatrix& m) { return m.rows(); }

json to_json(const std::vector<IntVec>& v)
{
    json out = json::array();
    for (const auto& x : v)
        out.push_back(x);
    return out;
}

json to_json(const Eigen::MatrixXd& m)
{
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        out.push_back(row);
    }
    return out;
}

json to_json(const TileCheck& t)
{
    json j;
    j["verdict"] = to_string(t.verdict);
    j["is_tile"] = t.is_tile;
    j["digit_count"] = t.digit_count;
    j["spectral_radius"] = t.spectral_radius;
    j["radius_upper"] = t.radius_upper;
    j["iterations"] = t.iterations;
    j["exact_certificate"] = t.exact_certificate;
    j["contact_states"] = t.contact.size();
    j["measure"] = t.measure ? json(*t.measure) : json(nullptr);
    return j;
}

json to_json(const MeasureBound& b)
{
    json j;
    j["union_bound"] = b.union_bound.str();
    j["union_bound_value"] = b.union_bound.to_double();
    j["integral"] = b.integral;
    if (b.integral)
        j["integral_bound"] = b.integral_bound;
    j["depth"] = b.depth;
    j["value"] = b.value().to_double();
    return j;
}

json to_json(const LayerHistogram& h)
{
    json counts = json::object();
    for (auto [layer, n] : h.counts)
        counts[std::to_string(layer)] = n;
    json j;
    j["counts"] = counts;
    j["dominant"] = h.dominant;
    j["boundary_fraction"] = h.boundary_fraction;
    j["resolution"] = h.resolution;
    return j;
}

json to_json(const ParallelepipedReport& r)
{
    json j;
    j["is_box"] = r.is_box;
    json edges = json::array();
    for (Eigen::Index c = 0; c < r.edge_vectors.cols(); ++c) {
        json e = json::array();
        for (Eigen::Index k = 0; k < r.edge_vectors.rows(); ++k)
            e.push_back(r.edge_vectors(k, c));
        edges.push_back(e);
    }
    j["edge_vectors"] = edges;
    j["corner"] = std::vector<double>(r.corner.data(), r.corner.data() + r.corner.size());
    j["hull_volume"] = r.hull_volume;
    j["fit_volume"] = r.fit_volume;
    j["measure_estimate"] = r.measure_estimate;
    return j;
}

json to_json(const QuadraticSurd& q)
{
    json j;
    j["factor"] = q.factor.str();
    j["radicand"] = q.radicand.str();
    j["value"] = q.to_double();
    return j;
}

json to_json(const HaarSystem& h)
{
    json j;
    j["m"] = h.basis.m;
    j["matrix"] = to_json(h.matrix);
    j["digits"] = to_json(h.digits);
    j["tile"] = h.tile;
    json basis = json::array();
    for (std::size_t s = 0; s < h.basis.vectors.size(); ++s) {
        json e;
        e["numerator"] = h.basis.numerators[s];
        e["norm2"] = h.basis.norms2[s];
        basis.push_back(e);
    }
    j["basis"] = basis;
    json wavelets = json::array();
    for (const auto& list : h.pieces) {
        json w = json::array();
        for (const auto& p : list)
            w.push_back({{"digit", p.digit}, {"coefficient", p.coefficient}});
        wavelets.push_back(w);
    }
    j["wavelets"] = wavelets;
    return j;
}

json to_json(const GramReport& g)
{
    json j;
    j["gram"] = to_json(g.gram);
    j["method"] = g.raster ? "raster" : "exact";
    j["max_deviation"] = g.max_deviation;
    j["error_bound"] = g.error_bound;
    if (g.exact) {
        json e = json::array();
        for (const auto& row : *g.exact) {
            json r = json::array();
            for (const auto& q : row)
                r.push_back(to_json(q));
            e.push_back(r);
        }
        j["exact"] = e;
    }
    return j;
}

json to_json(const TilingResult& t)
{
    json j;
    j["tiles"] = t.tiles;
    if (t.tiles) {
        j["n"] = t.n;
        j["shifts"] = t.shifts;
    } else {
        j["proved"] = t.proved;
        j["reason"] = t.reason;
    }
    return j;
}

json to_json(const Classification& c)
{
    json j;
    j["simple"] = c.simple;
    json p = json::array();
    for (const auto& x : c.progressions)
        p.push_back({{"a", x.a}, {"d", x.d}});
    j["progressions"] = p;
    if (!c.simple)
        j["reason"] = c.reason;
    return j;
}

} // namespace tileforge
