#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tileforge/attractor.hpp"
#include "tileforge/boxtile.hpp"
#include "tileforge/haar.hpp"
#include "tileforge/oned.hpp"

namespace tileforge {

using nlohmann::json;

enum class ProblemKind { attractor, boxform, oned };

struct ProblemParams {
    std::optional<int> depth;
    std::optional<int> resolution;
    double tolerance = kBoxTolerance;
};

/// Parsed problem description. For kind=attractor exactly one of
/// int_system / real_system is set.
struct ProblemSpec {
    ProblemKind kind = ProblemKind::attractor;
    std::optional<IntSystem> int_system;
    std::optional<RealSystem> real_system;
    bool residue_digits = false; // given as "digits"
    std::optional<BoxForm> form;
    std::optional<IntSet1D> set;
    std::vector<IntVec> translates; // optional tiling translates for renders
    ProblemParams params;

    /// Integer system for every kind; throws for real attractors.
    IntSystem int_data() const;
    /// Real view of the system for every kind.
    RealSystem real_data() const;
    std::size_t dim() const;
};

/// Validates structure and values; throws Error(invalid_input) with the
/// offending field in the message.
ProblemSpec parse_problem(const json& j);
ProblemSpec parse_problem_text(const std::string& text);
json problem_to_json(const ProblemSpec& spec);

json to_json(const IntMatrix& m);
json to_json(const std::vector<IntVec>& v);
json to_json(const Eigen::MatrixXd& m);
json to_json(const TileCheck& t);
json to_json(const MeasureBound& b);
json to_json(const LayerHistogram& h);
json to_json(const ParallelepipedReport& r);
json to_json(const HaarSystem& h);
json to_json(const GramReport& g);
json to_json(const TilingResult& t);
json to_json(const Classification& c);
json to_json(const QuadraticSurd& q);

} // namespace tileforge
