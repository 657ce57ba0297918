#include <cstdio>
#include <fstream>
#include <sstream>

#include "bessopt/dynamics.hpp"
#include "bessopt/errors.hpp"

namespace bessopt::dynamics {

namespace {

void put(std::ostream& out, double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    out << buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        cells.push_back(cell);
    }
    return cells;
}

} // namespace

void write_trace_csv(const TraceSet& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
    out << 't';
    for (const auto& [name, values] : trace.channels) {
        out << ',' << name;
    }
    out << '\n';
    for (std::size_t k = 0; k < trace.t.size(); ++k) {
        put(out, trace.t[k]);
        for (const auto& [name, values] : trace.channels) {
            out << ',';
            put(out, values[k]);
        }
        out << '\n';
    }
}

TraceSet read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError(path.string() + ":1: empty trace file");
    }
    const auto header = split_csv(line);
    if (header.empty() || header[0] != "t") {
        throw ConfigError(path.string() + ":1: header must start with 't'");
    }
    TraceSet trace;
    for (std::size_t c = 1; c < header.size(); ++c) {
        trace.add_channel(header[c]);
    }
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() != header.size()) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " columns");
        }
        try {
            trace.t.push_back(std::stod(cells[0]));
            for (std::size_t c = 1; c < cells.size(); ++c) {
                trace.channels[c - 1].second.push_back(std::stod(cells[c]));
            }
        } catch (const std::exception&) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": non-numeric value");
        }
    }
    return trace;
}

} // namespace bessopt::dynamics
