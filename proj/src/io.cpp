#include "zklab/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace zk::io {

using nlohmann::json;

std::string format_double(double x) {
    std::array<char, 32> buf;
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                 std::chars_format::general, 17);
    if (ec != std::errc{}) throw std::runtime_error("format_double");
    return std::string(buf.data(), p);
}

namespace {

const char* leg_name(diag::LegKind k) {
    switch (k) {
        case diag::LegKind::none: return "none";
        case diag::LegKind::free_leg: return "free";
        case diag::LegKind::fixed_leg: return "fixed";
    }
    throw std::logic_error("leg kind");
}

diag::LegKind leg_from_name(const std::string& s) {
    if (s == "none") return diag::LegKind::none;
    if (s == "free") return diag::LegKind::free_leg;
    if (s == "fixed") return diag::LegKind::fixed_leg;
    throw std::invalid_argument("unknown leg kind: " + s);
}

const char* terminal_name(diag::TerminalKind k) {
    switch (k) {
        case diag::TerminalKind::C_I: return "C_I";
        case diag::TerminalKind::C_II: return "C_II";
        case diag::TerminalKind::fused: return "fused";
    }
    throw std::logic_error("terminal kind");
}

diag::TerminalKind terminal_from_name(const std::string& s) {
    if (s == "C_I") return diag::TerminalKind::C_I;
    if (s == "C_II") return diag::TerminalKind::C_II;
    if (s == "fused") return diag::TerminalKind::fused;
    throw std::invalid_argument("unknown terminal kind: " + s);
}

}  // namespace

json couple_to_json(const diag::Couple& c) {
    json edges = json::array();
    for (const auto& e : c.edges)
        edges.push_back({{"tail", e.tail},
                         {"head", e.head},
                         {"normal", e.normal},
                         {"leg", leg_name(e.leg)}});
    return {{"schema", kSchemaVersion}, {"n_nodes", c.n_nodes}, {"edges", edges}};
}

diag::Couple couple_from_json(const json& j) {
    if (j.at("schema").get<int>() != kSchemaVersion)
        throw std::invalid_argument("couple schema version mismatch");
    diag::Couple c;
    c.n_nodes = j.at("n_nodes").get<int>();
    for (const auto& je : j.at("edges")) {
        diag::CoupleEdge e;
        e.tail = je.at("tail").get<int>();
        e.head = je.at("head").get<int>();
        e.normal = je.at("normal").get<bool>();
        e.leg = leg_from_name(je.at("leg").get<std::string>());
        c.edges.push_back(e);
    }
    c.validate();
    return c;
}

json trace_to_json(const diag::DecompositionTrace& t) {
    json steps = json::array();
    for (const auto& s : t.steps) {
        json outs = json::array();
        for (const auto& c : s.outputs) outs.push_back(couple_to_json(c));
        json flips = json::array();
        for (const auto& [oi, le] : s.flips)
            flips.push_back({{"output", oi}, {"edge", le}});
        steps.push_back({{"case", s.case_tag},
                         {"input", couple_to_json(s.input)},
                         {"chosen_leg", s.chosen_leg},
                         {"cut_edges", s.cut_edges},
                         {"outputs", outs},
                         {"output_edge_origin", s.output_edge_origin},
                         {"flips", flips}});
    }
    json terminals = json::array();
    for (const auto& c : t.terminals) terminals.push_back(couple_to_json(c));
    json kinds = json::array();
    for (auto k : t.terminal_kinds) kinds.push_back(terminal_name(k));
    return {{"schema", kSchemaVersion},
            {"input", couple_to_json(t.input)},
            {"steps", steps},
            {"terminals", terminals},
            {"terminal_kinds", kinds}};
}

diag::DecompositionTrace trace_from_json(const json& j) {
    if (j.at("schema").get<int>() != kSchemaVersion)
        throw std::invalid_argument("trace schema version mismatch");
    diag::DecompositionTrace t;
    t.input = couple_from_json(j.at("input"));
    for (const auto& js : j.at("steps")) {
        diag::TraceStep s;
        s.case_tag = js.at("case").get<std::string>();
        s.input = couple_from_json(js.at("input"));
        s.chosen_leg = js.at("chosen_leg").get<int>();
        s.cut_edges = js.at("cut_edges").get<std::vector<int>>();
        for (const auto& jo : js.at("outputs"))
            s.outputs.push_back(couple_from_json(jo));
        s.output_edge_origin =
            js.at("output_edge_origin").get<std::vector<std::vector<int>>>();
        for (const auto& jf : js.at("flips"))
            s.flips.emplace_back(jf.at("output").get<int>(),
                                 jf.at("edge").get<int>());
        t.steps.push_back(std::move(s));
    }
    for (const auto& jc : j.at("terminals"))
        t.terminals.push_back(couple_from_json(jc));
    for (const auto& jk : j.at("terminal_kinds"))
        t.terminal_kinds.push_back(terminal_from_name(jk.get<std::string>()));
    return t;
}

void write_stats_jsonl(std::ostream& os, const solver::EnsembleStats& stats) {
    const BallIndex& ball = *stats.ball;
    json header = {{"schema", kSchemaVersion},
                   {"kind", "ensemble_stats"},
                   {"members", stats.members},
                   {"seed", stats.seed},
                   {"config_digest", stats.config_digest},
                   {"dim", ball.spec().dim},
                   {"L", format_double(ball.spec().size)},
                   {"radius", format_double(ball.spec().radius)},
                   {"modes", ball.size()}};
    os << header.dump() << '\n';
    for (std::size_t i = 0; i < ball.size(); ++i) {
        const IntVec& K = ball.at(i);
        json row = json::object();
        json kv = json::array();
        for (int d = 0; d < K.dim; ++d) kv.push_back(K[d]);
        row["K"] = kv;
        row["mean"] = format_double(stats.mean[i]);
        row["variance"] = format_double(stats.variance[i]);
        row["se"] = format_double(stats.std_error[i]);
        os << row.dump() << '\n';
    }
}

solver::EnsembleStats read_stats_jsonl(std::istream& is, const BallIndex& ball) {
    std::string line;
    if (!std::getline(is, line))
        throw std::invalid_argument("stats input: missing header line");
    json header = json::parse(line);
    if (header.at("schema").get<int>() != kSchemaVersion)
        throw std::invalid_argument("stats schema version mismatch");
    if (header.at("modes").get<std::size_t>() != ball.size())
        throw std::invalid_argument("stats input: mode count mismatch");
    solver::EnsembleStats stats;
    stats.ball = &ball;
    stats.members = header.at("members").get<std::size_t>();
    stats.seed = header.at("seed").get<std::uint64_t>();
    stats.config_digest = header.at("config_digest").get<std::string>();
    stats.mean.assign(ball.size(), 0.0);
    stats.variance.assign(ball.size(), 0.0);
    stats.std_error.assign(ball.size(), 0.0);
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        json row = json::parse(line);
        IntVec K;
        K.dim = ball.spec().dim;
        const auto& kv = row.at("K");
        for (int d = 0; d < K.dim; ++d) K[d] = kv.at(static_cast<size_t>(d)).get<std::int32_t>();
        const auto i = ball.find(K);
        if (i < 0) throw std::invalid_argument("stats input: mode outside ball");
        const auto u = static_cast<std::size_t>(i);
        stats.mean[u] = std::stod(row.at("mean").get<std::string>());
        stats.variance[u] = std::stod(row.at("variance").get<std::string>());
        stats.std_error[u] = std::stod(row.at("se").get<std::string>());
        ++rows;
    }
    if (rows != ball.size())
        throw std::invalid_argument("stats input: row count mismatch");
    return stats;
}

void write_comparison_csv(std::ostream& os, const kinetic::SpectrumComparison& cmp) {
    os << "kx,ky,kz,mc_mean,mc_se,n_in,n1_discrete,kinetic_prediction,z\n";
    for (const auto& r : cmp.rows) {
        os << r.K[0] << ',' << r.K[1] << ',' << r.K[2] << ','
           << format_double(r.mc_mean) << ',' << format_double(r.mc_se) << ','
           << format_double(r.n_in) << ',' << format_double(r.n1) << ','
           << format_double(r.kinetic) << ',' << format_double(r.z) << '\n';
    }
}

std::string RunManifest::config_digest() const {
    std::vector<std::string> lines;
    lines.reserve(config.size() + 1);
    lines.push_back("command=" + command);
    // The digest identifies the experiment; execution knobs that never
    // affect results are excluded so reruns hash identically.
    for (const auto& [k, v] : config)
        if (k != "threads") lines.push_back(k + "=" + v);
    std::sort(lines.begin(), lines.end());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& l : lines) {
        for (unsigned char c : l) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= '\n';
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

json manifest_to_json(const RunManifest& m) {
    json stages = json::array();
    for (const auto& [name, sec] : m.stage_seconds)
        stages.push_back({{"stage", name}, {"seconds", format_double(sec)}});
    return {{"schema", kSchemaVersion},
            {"command", m.command},
            {"config", m.config},
            {"config_digest", m.config_digest()},
            {"seed", m.seed},
            {"artifact_version", m.artifact_version},
            {"wall_seconds", format_double(m.wall_seconds)},
            {"stages", stages},
            {"warnings", m.warnings}};
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void put_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t get_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw std::invalid_argument("checkpoint: truncated header length");
    return v;
}

}  // namespace

void write_checkpoint(std::ostream& os, const SpectralField& f) {
    const BallIndex& ball = *f.ball;
    json header = {{"schema", kSchemaVersion},
                   {"kind", "field_checkpoint"},
                   {"dim", ball.spec().dim},
                   {"L", format_double(ball.spec().size)},
                   {"radius", format_double(ball.spec().radius)},
                   {"modes", ball.size()},
                   {"time", format_double(f.time)},
                   {"value_format", "complex64_le"}};
    const std::string h = header.dump();
    put_u64(os, h.size());
    os.write(h.data(), static_cast<std::streamsize>(h.size()));
    for (const auto& z : f.values) {
        const float pair[2] = {static_cast<float>(z.real()),
                               static_cast<float>(z.imag())};
        os.write(reinterpret_cast<const char*>(pair), sizeof pair);
    }
}

SpectralField read_checkpoint(std::istream& is, const BallIndex& ball) {
    const std::uint64_t hlen = get_u64(is);
    std::string h(hlen, '\0');
    is.read(h.data(), static_cast<std::streamsize>(hlen));
    if (!is) throw std::invalid_argument("checkpoint: truncated header");
    json header = json::parse(h);
    if (header.at("schema").get<int>() != kSchemaVersion)
        throw std::invalid_argument("checkpoint schema version mismatch");
    if (header.at("modes").get<std::size_t>() != ball.size())
        throw std::invalid_argument("checkpoint: mode count mismatch");
    SpectralField f(ball);
    f.time = std::stod(header.at("time").get<std::string>());
    for (auto& z : f.values) {
        float pair[2];
        is.read(reinterpret_cast<char*>(pair), sizeof pair);
        if (!is) throw std::invalid_argument("checkpoint: truncated payload");
        z = {static_cast<double>(pair[0]), static_cast<double>(pair[1])};
    }
    return f;
}

}  // namespace zk::io
