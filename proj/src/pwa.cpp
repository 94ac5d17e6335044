#include "empc/pwa.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>

#include "empc/errors.hpp"

namespace empc {

namespace {

static_assert(std::endian::native == std::endian::little,
              "serialized tables assume a little-endian host");

constexpr char kMagic[4] = {'E', 'M', 'P', 'C'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 5 * sizeof(std::uint32_t);

void check_width(int scalar_width) {
    if (scalar_width != 4 && scalar_width != 8) {
        throw InvalidParameter("scalar width must be 4 or 8 bytes");
    }
}

double narrow_if_needed(double value, int scalar_width) {
    if (scalar_width == 8) return value;
    const double narrowed = static_cast<double>(static_cast<float>(value));
    if (!std::isfinite(narrowed)) {
        throw RangeError("law coefficient does not fit in single precision");
    }
    return narrowed;
}

}  // namespace

SearchResult sequential_search(const PwaLaw& law, const Eigen::VectorXd& x, double tol) {
    if (x.size() != law.dim) {
        throw DimensionError("sequential_search: point dimension does not match the law");
    }
    SearchResult result;
    for (std::size_t idx = 0; idx < law.regions.size(); ++idx) {
        const auto& region = law.regions[idx];
        bool inside = true;
        for (Eigen::Index r = 0; r < region.region.rows(); ++r) {
            ++result.ops;
            if (region.region.Z.row(r).dot(x) > region.region.z(r) + tol) {
                inside = false;
                break;
            }
        }
        if (inside) {
            result.u = region.F * x + region.g;
            result.region = static_cast<int>(idx);
            return result;
        }
    }

    int nearest = -1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < law.regions.size(); ++idx) {
        const double violation = max_violation(law.regions[idx].region, x);
        if (violation < best) {
            best = violation;
            nearest = static_cast<int>(idx);
        }
    }
    throw NoRegionFound("sequential_search: point is outside every region (nearest region " +
                            std::to_string(nearest) + ", violation " + std::to_string(best) + ")",
                        nearest, best);
}

LawTables make_tables(const PwaLaw& law, int scalar_width) {
    check_width(scalar_width);
    if (law.regions.empty()) {
        throw InvalidParameter("make_tables: refusing to export a law with no regions");
    }

    LawTables tables;
    tables.M = static_cast<std::uint32_t>(law.regions.size());
    tables.dim = static_cast<std::uint32_t>(law.dim);
    tables.l = static_cast<std::uint32_t>(law.l);
    tables.scalar_width = static_cast<std::uint32_t>(scalar_width);

    for (const auto& region : law.regions) {
        const Eigen::Index h = region.region.rows();
        tables.halfspace_counts.push_back(static_cast<std::uint32_t>(h));
        for (Eigen::Index r = 0; r < h; ++r) {
            for (Eigen::Index c = 0; c < law.dim; ++c) {
                tables.Z.push_back(narrow_if_needed(region.region.Z(r, c), scalar_width));
            }
            tables.z.push_back(narrow_if_needed(region.region.z(r), scalar_width));
        }
        for (Eigen::Index r = 0; r < law.l; ++r) {
            for (Eigen::Index c = 0; c < law.dim; ++c) {
                tables.F.push_back(narrow_if_needed(region.F(r, c), scalar_width));
            }
            tables.g.push_back(narrow_if_needed(region.g(r), scalar_width));
        }
    }
    return tables;
}

int tables_search_into(const LawTables& tables, const double* x, double* u_out, double tol,
                       int* ops) {
    const std::size_t dim = tables.dim;
    std::size_t z_row = 0;
    for (std::uint32_t idx = 0; idx < tables.M; ++idx) {
        const std::uint32_t h = tables.halfspace_counts[idx];
        bool inside = true;
        for (std::uint32_t r = 0; r < h && inside; ++r) {
            double dot = 0.0;
            const double* row = tables.Z.data() + (z_row + r) * dim;
            for (std::size_t c = 0; c < dim; ++c) dot += row[c] * x[c];
            if (ops) ++*ops;
            if (dot > tables.z[z_row + r] + tol) inside = false;
        }
        if (inside) {
            const std::size_t f_row = static_cast<std::size_t>(idx) * tables.l;
            for (std::uint32_t k = 0; k < tables.l; ++k) {
                double acc = tables.g[f_row + k];
                const double* row = tables.F.data() + (f_row + k) * dim;
                for (std::size_t c = 0; c < dim; ++c) acc += row[c] * x[c];
                u_out[k] = acc;
            }
            return static_cast<int>(idx);
        }
        z_row += h;
    }
    return -1;
}

SearchResult tables_search(const LawTables& tables, const Eigen::VectorXd& x, double tol) {
    if (x.size() != static_cast<Eigen::Index>(tables.dim)) {
        throw DimensionError("tables_search: point dimension does not match the tables");
    }
    SearchResult result;
    result.u.resize(tables.l);
    const int region = tables_search_into(tables, x.data(), result.u.data(), tol, &result.ops);
    if (region >= 0) {
        result.region = region;
        return result;
    }

    // Not found: report the nearest region for diagnosis.
    int nearest = -1;
    double best = std::numeric_limits<double>::infinity();
    std::size_t z_row = 0;
    for (std::uint32_t idx = 0; idx < tables.M; ++idx) {
        const std::uint32_t h = tables.halfspace_counts[idx];
        double violation = -std::numeric_limits<double>::infinity();
        for (std::uint32_t r = 0; r < h; ++r) {
            double dot = 0.0;
            const double* row = tables.Z.data() + (z_row + r) * tables.dim;
            for (std::size_t c = 0; c < tables.dim; ++c) dot += row[c] * x(c);
            violation = std::max(violation, dot - tables.z[z_row + r]);
        }
        if (violation < best) {
            best = violation;
            nearest = static_cast<int>(idx);
        }
        z_row += h;
    }
    throw NoRegionFound("tables_search: point is outside every region (nearest region " +
                            std::to_string(nearest) + ", violation " + std::to_string(best) + ")",
                        nearest, best);
}

namespace {

void write_u32(std::ostream& out, std::uint32_t value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

void write_scalars(std::ostream& out, const std::vector<double>& values, int width) {
    for (double value : values) {
        if (width == 8) {
            out.write(reinterpret_cast<const char*>(&value), sizeof(value));
        } else {
            const float f = static_cast<float>(value);
            out.write(reinterpret_cast<const char*>(&f), sizeof(f));
        }
    }
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t value = 0;
    in.read(reinterpret_cast<char*>(&value), sizeof(value));
    if (!in) throw CorruptArtifact("law artifact truncated in header");
    return value;
}

void read_scalars(std::istream& in, std::vector<double>& values, std::size_t count, int width) {
    values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (width == 8) {
            double value = 0.0;
            in.read(reinterpret_cast<char*>(&value), sizeof(value));
            if (!in) throw CorruptArtifact("law artifact truncated in payload");
            values[i] = value;
        } else {
            float value = 0.0f;
            in.read(reinterpret_cast<char*>(&value), sizeof(value));
            if (!in) throw CorruptArtifact("law artifact truncated in payload");
            values[i] = static_cast<double>(value);
        }
    }
}

}  // namespace

void write_tables(const LawTables& tables, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    out.write(kMagic, sizeof(kMagic));
    write_u32(out, kVersion);
    write_u32(out, tables.M);
    write_u32(out, tables.dim);
    write_u32(out, tables.l);
    write_u32(out, tables.scalar_width);
    for (std::uint32_t h : tables.halfspace_counts) write_u32(out, h);
    const int width = static_cast<int>(tables.scalar_width);
    write_scalars(out, tables.Z, width);
    write_scalars(out, tables.z, width);
    write_scalars(out, tables.F, width);
    write_scalars(out, tables.g, width);
    out.flush();
    if (!out) {
        throw Error("failed to write " + path.string());
    }
}

LawTables read_tables(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string() + " for reading");
    }
    char magic[4] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw CorruptArtifact("law artifact has a bad magic value");
    }
    const std::uint32_t version = read_u32(in);
    if (version != kVersion) {
        throw CorruptArtifact("law artifact version " + std::to_string(version) +
                              " is not supported");
    }

    LawTables tables;
    tables.M = read_u32(in);
    tables.dim = read_u32(in);
    tables.l = read_u32(in);
    tables.scalar_width = read_u32(in);
    if (tables.M < 1 || tables.dim < 1 || tables.l < 1 ||
        (tables.scalar_width != 4 && tables.scalar_width != 8)) {
        throw CorruptArtifact("law artifact header is inconsistent");
    }

    tables.halfspace_counts.resize(tables.M);
    std::size_t total_rows = 0;
    for (std::uint32_t i = 0; i < tables.M; ++i) {
        tables.halfspace_counts[i] = read_u32(in);
        total_rows += tables.halfspace_counts[i];
    }

    const int width = static_cast<int>(tables.scalar_width);
    read_scalars(in, tables.Z, total_rows * tables.dim, width);
    read_scalars(in, tables.z, total_rows, width);
    read_scalars(in, tables.F, static_cast<std::size_t>(tables.M) * tables.l * tables.dim, width);
    read_scalars(in, tables.g, static_cast<std::size_t>(tables.M) * tables.l, width);

    in.peek();
    if (!in.eof()) {
        throw CorruptArtifact("law artifact has trailing bytes");
    }
    return tables;
}

PwaLaw law_from_tables(const LawTables& tables, const ParamLayout& layout, int horizon,
                       double u_min, double u_max) {
    if (layout.dim() != static_cast<int>(tables.dim)) {
        throw DimensionError("law_from_tables: layout dimension " + std::to_string(layout.dim()) +
                             " does not match the artifact (" + std::to_string(tables.dim) + ")");
    }
    PwaLaw law;
    law.dim = static_cast<int>(tables.dim);
    law.l = static_cast<int>(tables.l);
    law.horizon = horizon;
    law.layout = layout;
    law.u_min = u_min;
    law.u_max = u_max;

    std::size_t z_row = 0;
    for (std::uint32_t idx = 0; idx < tables.M; ++idx) {
        const std::uint32_t h = tables.halfspace_counts[idx];
        CriticalRegion region;
        region.region.Z.resize(h, tables.dim);
        region.region.z.resize(h);
        for (std::uint32_t r = 0; r < h; ++r) {
            for (std::uint32_t c = 0; c < tables.dim; ++c) {
                region.region.Z(r, c) = tables.Z[(z_row + r) * tables.dim + c];
            }
            region.region.z(r) = tables.z[z_row + r];
        }
        region.F.resize(tables.l, tables.dim);
        region.g.resize(tables.l);
        const std::size_t f_row = static_cast<std::size_t>(idx) * tables.l;
        for (std::uint32_t r = 0; r < tables.l; ++r) {
            for (std::uint32_t c = 0; c < tables.dim; ++c) {
                region.F(r, c) = tables.F[(f_row + r) * tables.dim + c];
            }
            region.g(r) = tables.g[f_row + r];
        }
        region.U_gain = region.F;
        region.U_offset = region.g;
        law.regions.push_back(std::move(region));
        z_row += h;
    }
    return law;
}

void write_static_source(const LawTables& tables, std::ostream& out) {
    const char* scalar_type = tables.scalar_width == 4 ? "float" : "double";
    const int digits = tables.scalar_width == 4 ? 9 : 17;

    auto emit_array = [&](const char* name, const std::vector<double>& values) {
        out << "static const empc_scalar " << name << "[" << values.size() << "] = {";
        char buf[64];
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i % 4 == 0) out << "\n    ";
            std::snprintf(buf, sizeof(buf), "%.*g", digits, values[i]);
            out << buf << (i + 1 < values.size() ? ", " : "");
        }
        out << "\n};\n\n";
    };

    out << "/* Piecewise-affine control law tables: first-match sequential search\n"
        << " * over half-space rows, then one affine gain row per output. */\n"
        << "#include <stdint.h>\n\n"
        << "#define EMPC_REGION_COUNT " << tables.M << "u\n"
        << "#define EMPC_PARAM_DIM " << tables.dim << "u\n"
        << "#define EMPC_LAW_OUTPUTS " << tables.l << "u\n\n"
        << "typedef " << scalar_type << " empc_scalar;\n\n";

    out << "static const uint32_t empc_halfspace_counts[" << tables.halfspace_counts.size()
        << "] = {";
    for (std::size_t i = 0; i < tables.halfspace_counts.size(); ++i) {
        if (i % 8 == 0) out << "\n    ";
        out << tables.halfspace_counts[i] << (i + 1 < tables.halfspace_counts.size() ? ", " : "");
    }
    out << "\n};\n\n";

    emit_array("empc_region_Z", tables.Z);
    emit_array("empc_region_z", tables.z);
    emit_array("empc_gain_F", tables.F);
    emit_array("empc_gain_g", tables.g);
}

Footprint memory_footprint(const LawTables& tables, int scalar_width) {
    check_width(scalar_width);
    const std::size_t width = static_cast<std::size_t>(scalar_width);
    Footprint fp;
    fp.header_bytes = kHeaderBytes;
    fp.counter_bytes = sizeof(std::uint32_t) * tables.halfspace_counts.size();
    fp.partition_bytes = width * (tables.Z.size() + tables.z.size());
    fp.gain_bytes = width * (tables.F.size() + tables.g.size());
    return fp;
}

Footprint memory_footprint(const PwaLaw& law, int scalar_width) {
    return memory_footprint(make_tables(law, scalar_width), scalar_width);
}

std::size_t worst_case_ops(const LawTables& tables) {
    std::size_t total = 0;
    for (std::uint32_t h : tables.halfspace_counts) total += h;
    return total;
}

}  // namespace empc
