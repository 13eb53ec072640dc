#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ferroflow/experiments.hpp"
#include "ferroflow/state.hpp"

namespace ferroflow {

// Snapshot file: little-endian binary
//   magic "FFLW", version u32, nx u32, ny u32, lx f64, ly f64, time f64,
//   then u_x, u_y, w, m_x, m_y, phi, p as row-major f64 arrays.

inline constexpr std::uint32_t kSnapshotVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "snapshot format assumes a little-endian host");

namespace detail {

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void get(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("snapshot: truncated file");
}

inline void put_field(std::ostream& out, const std::vector<double>& f) {
    out.write(reinterpret_cast<const char*>(f.data()),
              std::streamsize(f.size() * sizeof(double)));
}

inline void get_field(std::istream& in, std::vector<double>& f) {
    in.read(reinterpret_cast<char*>(f.data()), std::streamsize(f.size() * sizeof(double)));
    if (!in) throw std::runtime_error("snapshot: truncated field data");
}

}  // namespace detail

inline void write_snapshot(std::ostream& out, const State& s) {
    out.write("FFLW", 4);
    detail::put(out, kSnapshotVersion);
    detail::put(out, std::uint32_t(s.grid().nx));
    detail::put(out, std::uint32_t(s.grid().ny));
    detail::put(out, s.grid().lx);
    detail::put(out, s.grid().ly);
    detail::put(out, s.time);
    detail::put_field(out, s.u.x);
    detail::put_field(out, s.u.y);
    detail::put_field(out, s.w.v);
    detail::put_field(out, s.m.x);
    detail::put_field(out, s.m.y);
    detail::put_field(out, s.phi.v);
    detail::put_field(out, s.p.v);
    if (!out) throw std::runtime_error("snapshot: write failed");
}

inline void write_snapshot(const std::string& path, const State& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("snapshot: cannot open '" + path + "' for writing");
    write_snapshot(out, s);
}

inline State read_snapshot(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "FFLW", 4) != 0)
        throw std::runtime_error("snapshot: bad magic");
    std::uint32_t version, nx, ny;
    detail::get(in, version);
    if (version != kSnapshotVersion)
        throw std::runtime_error("snapshot: unsupported version " + std::to_string(version));
    detail::get(in, nx);
    detail::get(in, ny);
    double lx, ly, time;
    detail::get(in, lx);
    detail::get(in, ly);
    detail::get(in, time);
    State s(Grid(int(nx), int(ny), lx, ly));
    s.time = time;
    detail::get_field(in, s.u.x);
    detail::get_field(in, s.u.y);
    detail::get_field(in, s.w.v);
    detail::get_field(in, s.m.x);
    detail::get_field(in, s.m.y);
    detail::get_field(in, s.phi.v);
    detail::get_field(in, s.p.v);
    return s;
}

inline State read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("snapshot: cannot open '" + path + "'");
    return read_snapshot(in);
}

// ---------------------------------------------------------------------------
// diagnostics CSV: fixed header, 17 significant digits, blank optional cells

inline const char* kDiagnosticsHeader =
    "time,energy,dissipation,energy_residual,m_l2_residual,rel_entropy,rel_dissipation";

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_diagnostics_csv(std::ostream& out, const DiagnosticsSeries& series) {
    out << kDiagnosticsHeader << "\n";
    for (const DiagnosticsSample& s : series) {
        out << format_g17(s.time) << ',' << format_g17(s.energy) << ','
            << format_g17(s.dissipation) << ',' << format_g17(s.energy_residual) << ',';
        if (s.m_l2_residual) out << format_g17(*s.m_l2_residual);
        out << ',';
        if (s.rel_entropy) out << format_g17(*s.rel_entropy);
        out << ',';
        if (s.rel_dissipation) out << format_g17(*s.rel_dissipation);
        out << "\n";
    }
    if (!out) throw std::runtime_error("diagnostics: write failed");
}

inline void write_diagnostics_csv(const std::string& path, const DiagnosticsSeries& series) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("diagnostics: cannot open '" + path + "'");
    write_diagnostics_csv(out, series);
}

/// Parses a diagnostics CSV written by write_diagnostics_csv (used by tests
/// and downstream tooling; round-trips at full precision).
inline DiagnosticsSeries read_diagnostics_csv(std::istream& in) {
    DiagnosticsSeries series;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("diagnostics: empty file");
    if (line != kDiagnosticsHeader) throw std::runtime_error("diagnostics: unexpected header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        DiagnosticsSample s;
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (std::size_t k = 0; k <= line.size(); ++k) {
            if (k == line.size() || line[k] == ',') {
                cells.push_back(line.substr(start, k - start));
                start = k + 1;
            }
        }
        if (cells.size() != 7) throw std::runtime_error("diagnostics: malformed row");
        s.time = std::stod(cells[0]);
        s.energy = std::stod(cells[1]);
        s.dissipation = std::stod(cells[2]);
        s.energy_residual = std::stod(cells[3]);
        if (!cells[4].empty()) s.m_l2_residual = std::stod(cells[4]);
        if (!cells[5].empty()) s.rel_entropy = std::stod(cells[5]);
        if (!cells[6].empty()) s.rel_dissipation = std::stod(cells[6]);
        series.push_back(s);
    }
    return series;
}

inline DiagnosticsSeries read_diagnostics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("diagnostics: cannot open '" + path + "'");
    return read_diagnostics_csv(in);
}

// ---------------------------------------------------------------------------
// sweep report CSV: per-tau rows plus a footer row with the fitted rate

inline void write_sweep_csv(std::ostream& out, const SweepReport& r) {
    out << "tau,sup_sqrt_E,final_sqrt_E,int_Dtilde\n";
    for (const SweepEntry& e : r.entries)
        out << format_g17(e.tau) << ',' << format_g17(e.sup_sqrt_re) << ','
            << format_g17(e.final_sqrt_re) << ',' << format_g17(e.int_rel_dissipation) << "\n";
    out << "slope," << format_g17(r.fit.slope) << ",r_squared," << format_g17(r.fit.r_squared)
        << "\n";
    if (!out) throw std::runtime_error("sweep csv: write failed");
}

inline void write_sweep_csv(const std::string& path, const SweepReport& r) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("sweep csv: cannot open '" + path + "'");
    write_sweep_csv(out, r);
}

}  // namespace ferroflow
