// Snapshot files: a text header (grid, fluid parameters, time, formulation,
// endianness tag, field list) terminated by "---", followed by each field's
// raw little-endian 64-bit floats in the order the header lists. Doubles in
// the header are printed with 17 significant digits so a read round trip is
// exact.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dragflow/diagnostics.hpp"
#include "dragflow/errors.hpp"
#include "dragflow/field.hpp"
#include "dragflow/model.hpp"

namespace dragflow {

inline constexpr const char* snapshot_magic = "dragflow snapshot 1";

struct SnapshotData {
    FluidState state;
    FluidParams params;
};

namespace detail {

inline void require_little_endian(const char* op) {
    if constexpr (std::endian::native != std::endian::little)
        throw Error(std::string(op) + ": snapshots are little-endian and this host is not");
}

inline std::vector<std::string> snapshot_field_names(int dim) {
    std::vector<std::string> names{"density_e"};
    for (int a = 0; a < dim; ++a) names.push_back("velocity_e_" + std::to_string(a));
    names.push_back("density_ns");
    for (int a = 0; a < dim; ++a) names.push_back("velocity_ns_" + std::to_string(a));
    return names;
}

inline void write_doubles(std::ostream& os, const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             (std::streamsize)(v.size() * sizeof(double)));
}

inline void read_doubles(std::istream& is, std::vector<double>& v, const std::string& name) {
    is.read(reinterpret_cast<char*>(v.data()), (std::streamsize)(v.size() * sizeof(double)));
    if ((std::size_t)is.gcount() != v.size() * sizeof(double))
        throw Error("snapshot: truncated payload while reading field '" + name + "'");
}

}  // namespace detail

inline void write_snapshot(const std::string& path, const FluidState& s,
                           const FluidParams& par) {
    detail::require_little_endian("write_snapshot");
    const Grid& g = s.grid();
    std::ostringstream head;
    head << snapshot_magic << '\n';
    head << "endianness = little\n";
    head << "dim = " << g.dim() << '\n';
    head << "n_points =";
    for (int a = 0; a < g.dim(); ++a) head << ' ' << g.n(a);
    head << '\n';
    head << "length =";
    for (int a = 0; a < g.dim(); ++a) head << ' ' << detail::fmt_g17(g.length(a));
    head << '\n';
    head << "time = " << detail::fmt_g17(s.time) << '\n';
    head << "formulation = " << to_string(s.form) << '\n';
    head << "gamma = " << detail::fmt_g17(par.gamma) << '\n';
    head << "mu = " << detail::fmt_g17(par.mu) << '\n';
    head << "lambda = " << detail::fmt_g17(par.lambda) << '\n';
    head << "vacuum_floor = " << detail::fmt_g17(par.vacuum_floor) << '\n';
    head << "fields =";
    for (const std::string& n : detail::snapshot_field_names(g.dim())) head << ' ' << n;
    head << '\n';
    head << "---\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("write_snapshot: cannot open '" + path + "'");
    out << head.str();
    detail::write_doubles(out, s.density_e.v);
    for (int a = 0; a < g.dim(); ++a) detail::write_doubles(out, s.velocity_e[a]);
    detail::write_doubles(out, s.density_ns.v);
    for (int a = 0; a < g.dim(); ++a) detail::write_doubles(out, s.velocity_ns[a]);
    if (!out) throw Error("write_snapshot: write to '" + path + "' failed");
}

inline SnapshotData read_snapshot(const std::string& path) {
    detail::require_little_endian("read_snapshot");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("read_snapshot: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line) || line != snapshot_magic)
        throw Error("read_snapshot: '" + path + "' is not a snapshot (bad magic line)");
    std::map<std::string, std::string> kv;
    while (std::getline(in, line)) {
        if (line == "---") break;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("read_snapshot: malformed header line '" + line + "'");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        while (!key.empty() && key.back() == ' ') key.pop_back();
        while (!value.empty() && value.front() == ' ') value.erase(value.begin());
        kv[key] = value;
    }
    if (line != "---") throw Error("read_snapshot: missing '---' header terminator");

    auto need = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw Error("read_snapshot: header is missing '" + key + "'");
        return it->second;
    };
    if (need("endianness") != "little")
        throw Error("read_snapshot: unsupported endianness '" + kv["endianness"] + "'");

    const int dim = std::stoi(need("dim"));
    std::istringstream np(need("n_points")), ln(need("length"));
    std::vector<std::int64_t> n;
    std::vector<double> L;
    std::int64_t ni;
    double Li;
    while (np >> ni) n.push_back(ni);
    while (ln >> Li) L.push_back(Li);
    const Grid g = Grid::make(dim, n, L);

    const std::string form_name = need("formulation");
    Formulation form;
    if (form_name == to_string(Formulation::primitive)) form = Formulation::primitive;
    else if (form_name == to_string(Formulation::log_density)) form = Formulation::log_density;
    else throw Error("read_snapshot: unknown formulation '" + form_name + "'");

    SnapshotData snap{FluidState::equilibrium(g, form),
                      FluidParams::make(std::stod(need("gamma")), std::stod(need("mu")),
                                        std::stod(need("lambda")),
                                        std::stod(need("vacuum_floor")))};
    snap.state.time = std::stod(need("time"));

    const auto expected = detail::snapshot_field_names(dim);
    std::vector<std::string> listed;
    std::istringstream fl(need("fields"));
    std::string tok;
    while (fl >> tok) listed.push_back(tok);
    if (listed != expected) throw Error("read_snapshot: unexpected field list in '" + path + "'");

    detail::read_doubles(in, snap.state.density_e.v, "density_e");
    for (int a = 0; a < dim; ++a)
        detail::read_doubles(in, snap.state.velocity_e[a], "velocity_e_" + std::to_string(a));
    detail::read_doubles(in, snap.state.density_ns.v, "density_ns");
    for (int a = 0; a < dim; ++a)
        detail::read_doubles(in, snap.state.velocity_ns[a], "velocity_ns_" + std::to_string(a));
    char extra;
    if (in.read(&extra, 1) && in.gcount() == 1)
        throw Error("read_snapshot: trailing bytes after payload in '" + path + "'");
    return snap;
}

// Human-readable header echo plus per-field min/max/mean, for the CLI
// inspect-snapshot subcommand.
inline std::string inspect_snapshot(const std::string& path) {
    const SnapshotData snap = read_snapshot(path);
    const Grid& g = snap.state.grid();
    std::ostringstream os;
    os << path << '\n';
    os << "  grid: " << g.describe() << '\n';
    os << "  time: " << detail::fmt_g17(snap.state.time) << '\n';
    os << "  formulation: " << to_string(snap.state.form) << '\n';
    os << "  gamma = " << detail::fmt_g17(snap.params.gamma)
       << ", mu = " << detail::fmt_g17(snap.params.mu)
       << ", lambda = " << detail::fmt_g17(snap.params.lambda)
       << ", vacuum_floor = " << detail::fmt_g17(snap.params.vacuum_floor) << '\n';
    auto stat = [&](const std::string& name, const std::vector<double>& v) {
        double lo = v[0], hi = v[0], sum = 0.0;
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
            sum += x;
        }
        os << "  " << name << ": min " << detail::fmt_g17(lo) << ", max " << detail::fmt_g17(hi)
           << ", mean " << detail::fmt_g17(sum / (double)v.size()) << '\n';
    };
    stat("density_e", snap.state.density_e.v);
    for (int a = 0; a < g.dim(); ++a)
        stat("velocity_e_" + std::to_string(a), snap.state.velocity_e[a]);
    stat("density_ns", snap.state.density_ns.v);
    for (int a = 0; a < g.dim(); ++a)
        stat("velocity_ns_" + std::to_string(a), snap.state.velocity_ns[a]);
    return os.str();
}

}  // namespace dragflow
