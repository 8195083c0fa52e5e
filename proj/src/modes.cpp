#include "pdn/modes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "pdn/binary_io.hpp"
#include "pdn/csv.hpp"
#include "pdn/errors.hpp"
#include "pdn/plane.hpp"

namespace pdn {

void SeekerConfig::validate() const {
    if (max_iterations == 0 || !(tolerance > 0.0) || !(merge_radius > 0.0) || !(density_floor > 0.0) ||
        max_modes == 0) {
        throw DomainError("seeker config: all settings must be positive");
    }
    if (!(merge_radius > tolerance)) throw DomainError("seeker config: merge radius must exceed the tolerance");
}

Ascent ascend(const MixtureParams& params, std::span<const double> start, const SeekerConfig& config,
              std::vector<double>* trajectory) {
    if (start.size() != params.d) throw DomainError("ascend: start point dimension mismatch");
    Ascent a;
    a.point.assign(start.begin(), start.end());
    if (trajectory) trajectory->push_back(log_density(params, a.point));
    std::vector<double> num(params.d), den(params.d);
    for (a.iterations = 0; a.iterations < config.max_iterations;) {
        const auto w = responsibilities(params, a.point);
        std::fill(num.begin(), num.end(), 0.0);
        std::fill(den.begin(), den.end(), 0.0);
        for (std::size_t i = 0; i < params.m; ++i) {
            if (w[i] == 0.0) continue;
            const auto mu = params.mean(i);
            const auto sd = params.deviation(i);
            for (std::size_t k = 0; k < params.d; ++k) {
                const double precision = w[i] / (sd[k] * sd[k]);
                num[k] += precision * mu[k];
                den[k] += precision;
            }
        }
        double step2 = 0.0;
        for (std::size_t k = 0; k < params.d; ++k) {
            const double next = num[k] / den[k];
            step2 += (next - a.point[k]) * (next - a.point[k]);
            a.point[k] = next;
        }
        ++a.iterations;
        if (trajectory) trajectory->push_back(log_density(params, a.point));
        if (std::sqrt(step2) < config.tolerance) {
            a.converged = true;
            break;
        }
    }
    a.log_density = log_density(params, a.point);
    return a;
}

std::vector<Mode> find_modes(const MixtureParams& params, const DesignScaler& scaler, const SeekerConfig& config) {
    params.validate();
    config.validate();
    if (scaler.dims() != params.d) throw DomainError("find_modes: scaler dimension mismatch");

    std::vector<Mode> modes;
    for (std::size_t i = 0; i < params.m; ++i) {
        Ascent a = ascend(params, params.mean(i), config);
        Mode* home = nullptr;
        for (auto& existing : modes) {
            double dist2 = 0.0;
            for (std::size_t k = 0; k < params.d; ++k) {
                const double diff = existing.location[k] - a.point[k];
                dist2 += diff * diff;
            }
            if (std::sqrt(dist2) <= config.merge_radius) {
                home = &existing;
                break;
            }
        }
        if (home) {
            home->basin_components.push_back(i);
            if (a.log_density > home->log_density) {
                home->location = std::move(a.point);
                home->log_density = a.log_density;
                home->converged = a.converged;
            }
            continue;
        }
        Mode mode;
        mode.location = std::move(a.point);
        mode.log_density = a.log_density;
        mode.converged = a.converged;
        mode.basin_components.push_back(i);
        modes.push_back(std::move(mode));
    }
    if (modes.empty()) throw DomainError("find_modes: no ascent produced a mode");

    // Stable sort: equal densities keep the order of their lowest component index.
    std::stable_sort(modes.begin(), modes.end(),
                     [](const Mode& a, const Mode& b) { return a.log_density > b.log_density; });
    const double floor = modes.front().log_density + std::log(config.density_floor);
    std::erase_if(modes, [&](const Mode& m) { return m.log_density < floor; });
    if (modes.size() > config.max_modes) modes.resize(config.max_modes);

    for (std::size_t r = 0; r < modes.size(); ++r) {
        Mode& mode = modes[r];
        mode.rank = r + 1;
        mode.density = std::exp(mode.log_density);
        mode.structure.radii = scaler.to_physical_clamped(mode.location);
        const double clamped = log_density(params, scaler.to_design(mode.structure.radii));
        mode.boundary = std::abs(clamped - mode.log_density) > 0.01 * std::abs(mode.log_density);
    }
    return modes;
}

void emit_designs(std::span<const Mode> modes, const std::filesystem::path& path, const Projection* projection) {
    std::ostringstream out;
    const std::size_t layers = modes.empty() ? 0 : modes.front().structure.radii.size();
    out << "rank,density,converged";
    for (std::size_t l = 0; l < layers; ++l) out << ",r" << (l + 1);
    if (projection) out << ",u,v";
    out << '\n';
    for (const Mode& m : modes) {
        char dens[32];
        std::snprintf(dens, sizeof dens, "%.9e", m.density);
        out << m.rank << ',' << dens << ',' << (m.converged ? 1 : 0);
        for (double r : m.structure.radii) out << ',' << csv::fixed(r * 1e3, 2);
        if (projection) {
            const auto uv = project(*projection, m.location);
            out << ',' << csv::fixed(uv[0], 6) << ',' << csv::fixed(uv[1], 6);
        }
        out << '\n';
    }
    io::write_text(path, out.str());
}

std::vector<DesignRow> read_designs(const std::filesystem::path& path) {
    const csv::Table table = csv::read_table(path);
    std::vector<std::size_t> radius_cols;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        const std::string& h = table.header[c];
        if (h.size() > 1 && h[0] == 'r' && h != "rank" &&
            std::all_of(h.begin() + 1, h.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
            radius_cols.push_back(c);
        }
    }
    if (radius_cols.empty()) throw csv::ParseError("designs file has no r<k> columns", 1);
    const std::size_t rank_col = table.column("rank");
    const auto density_col = std::find(table.header.begin(), table.header.end(), "density");
    const auto converged_col = std::find(table.header.begin(), table.header.end(), "converged");
    std::vector<DesignRow> rows;
    for (std::size_t r = 0; r < table.cells.size(); ++r) {
        DesignRow row;
        row.rank = static_cast<std::size_t>(table.number(r, rank_col));
        if (density_col != table.header.end()) {
            row.density = table.number(r, static_cast<std::size_t>(density_col - table.header.begin()));
        }
        if (converged_col != table.header.end()) {
            row.converged = table.number(r, static_cast<std::size_t>(converged_col - table.header.begin())) != 0.0;
        }
        for (std::size_t c : radius_cols) row.structure.radii.push_back(table.number(r, c) * 1e-3);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace pdn
