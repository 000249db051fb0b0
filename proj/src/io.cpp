#include "piezotherm/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "piezotherm/errors.hpp"

namespace piezotherm {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    return out;
}

std::filesystem::path sidecar(const std::filesystem::path& path) {
    std::filesystem::path p = path;
    p += ".json";
    return p;
}

}  // namespace

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_field_csv(const std::filesystem::path& path, const SpaceTimeField& f) {
    std::ofstream out = open_out(path);
    const auto nodes = f.grid().nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) out << (i ? "," : "") << format_double(nodes[i]);
    out << '\n';
    for (std::size_t n = 0; n < f.n_levels(); ++n) {
        const auto row = f.level(n);
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
        out << '\n';
    }
}

void write_trace_csv(const std::filesystem::path& path, const ObservationTrace& trace) {
    {
        std::ofstream out = open_out(path);
        out << "t,charge\n";
        for (std::size_t n = 0; n < trace.values.size(); ++n) {
            out << format_double(trace.time.time(n)) << ',' << format_double(trace.values[n]) << '\n';
        }
    }
    nlohmann::json meta{{"kind", to_string(trace.kind)},
                        {"gamma", trace.gamma},
                        {"delta", trace.delta},
                        {"seed", trace.seed},
                        {"n_levels", trace.values.size()},
                        {"end_time", trace.time.end_time()}};
    if (!trace.note.empty()) meta["note"] = trace.note;
    write_json(sidecar(path), meta);
}

ObservationTrace read_trace_csv(const std::filesystem::path& path, const TimeGrid& time) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read trace '" + path.string() + "'");
    ObservationTrace tr{time, {}, TraceKind::bulk, 0.0, 0.0, 0, "", {}};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": expected two columns");
        }
        try {
            std::size_t used = 0;
            const double v = std::stod(line.substr(comma + 1), &used);
            tr.values.push_back(v);
        } catch (const std::exception&) {
            if (lineno == 1) continue;  // header
            throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": not a number");
        }
    }
    if (tr.values.size() != time.n_levels()) {
        throw DimensionMismatch("trace '" + path.string() + "' has " + std::to_string(tr.values.size()) +
                                " samples, the time grid has " + std::to_string(time.n_levels()) + " levels");
    }
    if (std::ifstream meta(sidecar(path)); meta) {
        const auto j = nlohmann::json::parse(meta);
        tr.kind = trace_kind_from_string(j.value("kind", std::string("bulk")));
        tr.gamma = j.value("gamma", 0.0);
        tr.delta = j.value("delta", 0.0);
        tr.seed = j.value("seed", std::uint64_t{0});
    }
    return tr;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace piezotherm
