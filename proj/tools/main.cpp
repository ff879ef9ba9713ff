// cvqkd: key rates, sweeps, optimization, simulation and verification for a
// binary-modulation all-heterodyne CV-QKD protocol over a Gaussian channel.
//
// The tool is a thin shell over the C API in cvqkd.h: it parses configuration
// (flat key=value with [sections], or JSON), pushes numeric settings into the
// engine, and serializes the resulting table as CSV or JSON with
// round-trippable (17 significant digit) numbers.

#include "cvqkd.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::json;

struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_number(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true") return 1.0;
    if (t == "false") return 0.0;
    size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw CliError("config value for '" + key + "' is not a number: '" + t + "'");
    }
    if (used != t.size())
        throw CliError("config value for '" + key + "' is not a number: '" + t + "'");
    return v;
}

// Flat key = value lines grouped under [section] headers; # and ; start comments.
std::map<std::string, double> parse_ini(std::istream& in) {
    std::map<std::string, double> out;
    std::string line, section;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw CliError("config line " + std::to_string(line_no) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw CliError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        out[key] = parse_number(key, line.substr(eq + 1));
    }
    return out;
}

void flatten_json(const json& j, const std::string& prefix, std::map<std::string, double>& out) {
    for (const auto& [key, value] : j.items()) {
        const std::string full = prefix.empty() ? key : prefix + "." + key;
        if (value.is_object()) flatten_json(value, full, out);
        else if (value.is_number()) out[full] = value.get<double>();
        else if (value.is_boolean()) out[full] = value.get<bool>() ? 1.0 : 0.0;
        else throw CliError("config key '" + full + "' must be numeric");
    }
}

std::map<std::string, double> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    const size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        std::map<std::string, double> out;
        flatten_json(json::parse(text), "", out);
        return out;
    }
    std::istringstream stream(text);
    return parse_ini(stream);
}

struct OptsHandle {
    cvqkd_opts* ptr = nullptr;
    OptsHandle() : ptr(cvqkd_opts_new()) {}
    ~OptsHandle() { cvqkd_opts_free(ptr); }
    OptsHandle(const OptsHandle&) = delete;
    OptsHandle& operator=(const OptsHandle&) = delete;
};

struct TableHandle {
    cvqkd_table* ptr = nullptr;
    ~TableHandle() { cvqkd_table_free(ptr); }
};

void apply_setting(cvqkd_opts* opts, const std::string& key, double value) {
    if (cvqkd_opts_set(opts, key.c_str(), value) != CVQKD_OK)
        throw CliError(std::string(cvqkd_last_error()));
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

enum class NoteStyle { none, leading_check, trailing_error };

std::string to_csv(const cvqkd_table* table, NoteStyle notes) {
    std::ostringstream out;
    const size_t cols = cvqkd_table_cols(table);
    if (notes == NoteStyle::leading_check) out << "check,";
    for (size_t c = 0; c < cols; ++c) {
        if (c) out << ',';
        out << cvqkd_table_col_name(table, c);
    }
    if (notes == NoteStyle::trailing_error) out << ",error";
    out << '\n';
    for (size_t r = 0; r < cvqkd_table_rows(table); ++r) {
        if (notes == NoteStyle::leading_check) out << cvqkd_table_row_note(table, r) << ',';
        for (size_t c = 0; c < cols; ++c) {
            if (c) out << ',';
            out << format_value(cvqkd_table_value(table, r, c));
        }
        if (notes == NoteStyle::trailing_error) out << ',' << cvqkd_table_row_note(table, r);
        out << '\n';
    }
    return out.str();
}

std::string to_json(const cvqkd_table* table, NoteStyle notes, const std::string& command) {
    json doc;
    doc["schema_version"] = 1;
    doc["command"] = command;
    json rows = json::array();
    const size_t cols = cvqkd_table_cols(table);
    for (size_t r = 0; r < cvqkd_table_rows(table); ++r) {
        json row = json::object();
        if (notes == NoteStyle::leading_check) row["check"] = cvqkd_table_row_note(table, r);
        for (size_t c = 0; c < cols; ++c)
            row[cvqkd_table_col_name(table, c)] = cvqkd_table_value(table, r, c);
        if (notes == NoteStyle::trailing_error) row["error"] = cvqkd_table_row_note(table, r);
        rows.push_back(std::move(row));
    }
    doc["results"] = std::move(rows);
    return doc.dump(2) + "\n";
}

void write_output(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliError("cannot open output file: " + path);
    out << text;
    if (!out) throw CliError("failed writing output file: " + path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-key rate engine for binary-modulation all-heterodyne CV-QKD"};
    app.require_subcommand(1);

    std::string config_path, output_path, format = "csv", dump_dir;
    std::vector<std::string> overrides;
    bool verbose = false;
    app.add_option("-c,--config", config_path, "config file (key = value with [sections], or JSON)");
    app.add_option("-s,--set", overrides, "override a config key, KEY=VALUE (repeatable)");
    app.add_option("-o,--output", output_path, "output file (default: stdout)");
    app.add_option("-f,--format", format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("-v,--verbose", verbose, "print progress to stderr");

    auto* cmd_rate = app.add_subcommand("rate", "key-rate report at fixed parameters");
    cmd_rate->add_option("--dump-operators", dump_dir, "also write the success POVM matrices as CSV");
    auto* cmd_sweep = app.add_subcommand("sweep", "optimized rate over an attenuation grid");
    auto* cmd_optimize = app.add_subcommand("optimize", "optimize parameters at one channel point");
    auto* cmd_simulate = app.add_subcommand("simulate", "Monte Carlo of the protocol");
    auto* cmd_verify = app.add_subcommand("verify", "run the named invariant checks");
    for (auto* sub : {cmd_rate, cmd_sweep, cmd_optimize, cmd_simulate, cmd_verify})
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        OptsHandle opts;
        if (!opts.ptr) throw CliError("engine options allocation failed");
        if (!config_path.empty())
            for (const auto& [key, value] : load_config(config_path)) apply_setting(opts.ptr, key, value);
        for (const std::string& item : overrides) {
            const size_t eq = item.find('=');
            if (eq == std::string::npos) throw CliError("--set expects KEY=VALUE, got '" + item + "'");
            const std::string key = trim(item.substr(0, eq));
            apply_setting(opts.ptr, key, parse_number(key, item.substr(eq + 1)));
        }

        std::string command;
        NoteStyle notes = NoteStyle::none;
        TableHandle table;
        int rc = CVQKD_OK;
        if (cmd_rate->parsed()) {
            command = "rate";
            rc = cvqkd_run_rate(opts.ptr, &table.ptr);
            if (rc == CVQKD_OK && !dump_dir.empty()) rc = cvqkd_dump_operators(opts.ptr, dump_dir.c_str());
        } else if (cmd_sweep->parsed()) {
            command = "sweep";
            notes = NoteStyle::trailing_error;
            rc = cvqkd_run_sweep(opts.ptr, &table.ptr);
        } else if (cmd_optimize->parsed()) {
            command = "optimize";
            rc = cvqkd_run_optimize(opts.ptr, &table.ptr);
        } else if (cmd_simulate->parsed()) {
            command = "simulate";
            rc = cvqkd_run_simulate(opts.ptr, &table.ptr);
        } else if (cmd_verify->parsed()) {
            command = "verify";
            notes = NoteStyle::leading_check;
            rc = cvqkd_run_verify(opts.ptr, &table.ptr);
        }
        if (rc != CVQKD_OK)
            throw CliError(std::string(cvqkd_status_name(rc)) + ": " + cvqkd_last_error());

        if (verbose) std::cerr << "cvqkd " << cvqkd_version() << ": " << command << " done\n";
        write_output(format == "csv" ? to_csv(table.ptr, notes) : to_json(table.ptr, notes, command),
                     output_path);

        if (cmd_verify->parsed()) {
            size_t failures = 0;
            for (size_t r = 0; r < cvqkd_table_rows(table.ptr); ++r)
                if (cvqkd_table_value(table.ptr, r, 0) == 0.0) ++failures;
            if (failures > 0) {
                std::cerr << failures << " check(s) failed\n";
                return 3;
            }
        }
        return 0;
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
