#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "empc/mpqp.hpp"

namespace empc {

struct SearchResult {
    Eigen::VectorXd u;
    int region = -1;  //!< index of the first matching region
    int ops = 0;      //!< half-space dot products evaluated
};

/// First-match scan over the stored regions in their stored order.  Throws
/// NoRegionFound (with the nearest region and its violation) when the point
/// lies outside every region.
SearchResult sequential_search(const PwaLaw& law, const Eigen::VectorXd& x,
                               double tol = 1e-8);

/// Flat-array image of a PwaLaw, matching the serialized layout: header
/// counts, per-region half-space counts, then region-major [Z | z | F | g]
/// blocks.  In 4-byte mode every scalar has been rounded to the nearest
/// single-precision value (and is stored widened back to double), so
/// evaluation over the tables reproduces exactly what a float-only target
/// would compute.
struct LawTables {
    std::uint32_t M = 0;
    std::uint32_t dim = 0;
    std::uint32_t l = 0;
    std::uint32_t scalar_width = 8;  //!< bytes per stored scalar: 4 or 8
    std::vector<std::uint32_t> halfspace_counts;
    std::vector<double> Z;  //!< concatenated h_i x dim blocks, row-major
    std::vector<double> z;  //!< concatenated h_i blocks
    std::vector<double> F;  //!< concatenated l x dim blocks, row-major
    std::vector<double> g;  //!< concatenated l blocks

    bool operator==(const LawTables&) const = default;
};

LawTables make_tables(const PwaLaw& law, int scalar_width = 8);

/// Allocation-free core: scans the tables for the first region containing
/// x[0..dim) and writes the l law outputs to u_out.  Returns the region
/// index, incrementing *ops (when given) per half-space product evaluated.
/// Returns -1 when no region matches.
int tables_search_into(const LawTables& tables, const double* x, double* u_out,
                       double tol = 1e-8, int* ops = nullptr);

/// Convenience wrapper with the same not-found semantics as
/// sequential_search.
SearchResult tables_search(const LawTables& tables, const Eigen::VectorXd& x,
                           double tol = 1e-8);

void write_tables(const LawTables& tables, const std::filesystem::path& path);
LawTables read_tables(const std::filesystem::path& path);

/// Rehydrates a law from its flat tables for host-side evaluation.  The
/// tables do not store active sets, full-sequence gains, or certification
/// data, so only the region geometry and the applied law come back; layout,
/// horizon, and input bounds are supplied from the configuration that
/// produced the artifact.
PwaLaw law_from_tables(const LawTables& tables, const ParamLayout& layout, int horizon,
                       double u_min, double u_max);

/// Renders the tables as compilable C source (static const arrays), the form
/// that gets burned into a small target's ROM.
void write_static_source(const LawTables& tables, std::ostream& out);

struct Footprint {
    std::size_t header_bytes = 0;     //!< magic, version, counts
    std::size_t counter_bytes = 0;    //!< per-region half-space counts
    std::size_t partition_bytes = 0;  //!< all Z and z entries
    std::size_t gain_bytes = 0;       //!< all F and g entries
    std::size_t total() const {
        return header_bytes + counter_bytes + partition_bytes + gain_bytes;
    }
};

Footprint memory_footprint(const LawTables& tables, int scalar_width);
Footprint memory_footprint(const PwaLaw& law, int scalar_width);

/// Upper bound on half-space products per evaluation (sum of all h_i).
std::size_t worst_case_ops(const LawTables& tables);

}  // namespace empc
