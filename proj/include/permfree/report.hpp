#pragma once

#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "permfree/errors.hpp"

namespace permfree {

/// One tabular result record. The CSV schema is fixed:
///   monomial,N,M,estimator,value_re,value_im,stderr,abs_error_vs_limit,runtime_ms
/// stderr is present iff the estimator is stochastic; abs_error_vs_limit iff
/// a limit value exists. JSON rows carry the same keys plus an "exact" field
/// ("num/den") when the value is an exact rational.
struct ReportRow {
    std::string monomial;
    int N = 0;
    int M = 0;
    std::string estimator;  // limit | exact | exact-sampled | mc | error
    std::complex<double> value;
    std::optional<double> std_error;
    std::optional<double> abs_error_vs_limit;
    double runtime_ms = 0;
    std::optional<std::string> exact_fraction;  // "num/den" (JSON only)
};

/// 17 significant digits: enough to reproduce the double bit pattern.
inline std::string format17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline const char* kReportCsvHeader =
    "monomial,N,M,estimator,value_re,value_im,stderr,abs_error_vs_limit,runtime_ms";

inline std::string report_to_csv(const std::vector<ReportRow>& rows) {
    std::string out = kReportCsvHeader;
    out += '\n';
    for (const ReportRow& r : rows) {
        out += r.monomial;
        out += ',' + std::to_string(r.N);
        out += ',' + std::to_string(r.M);
        out += ',' + r.estimator;
        out += ',' + format17(r.value.real());
        out += ',' + format17(r.value.imag());
        out += ',';
        if (r.std_error) out += format17(*r.std_error);
        out += ',';
        if (r.abs_error_vs_limit) out += format17(*r.abs_error_vs_limit);
        out += ',' + format17(r.runtime_ms);
        out += '\n';
    }
    return out;
}

inline std::string report_to_json(const std::vector<ReportRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const ReportRow& r : rows) {
        nlohmann::json obj{
            {"monomial", r.monomial},
            {"N", r.N},
            {"M", r.M},
            {"estimator", r.estimator},
            {"value_re", r.value.real()},
            {"value_im", r.value.imag()},
            {"stderr", r.std_error ? nlohmann::json(*r.std_error) : nlohmann::json()},
            {"abs_error_vs_limit",
             r.abs_error_vs_limit ? nlohmann::json(*r.abs_error_vs_limit) : nlohmann::json()},
            {"runtime_ms", r.runtime_ms},
        };
        if (r.exact_fraction) obj["exact"] = *r.exact_fraction;
        arr.push_back(std::move(obj));
    }
    return arr.dump(2) + "\n";
}

inline std::vector<ReportRow> parse_report_csv(const std::string& text) {
    std::vector<ReportRow> rows;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty report");
    if (line != kReportCsvHeader) throw ValidationError("unexpected report header: " + line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (fields.size() != 9) throw ValidationError("malformed report row: " + line);
        ReportRow r;
        r.monomial = fields[0];
        r.N = std::stoi(fields[1]);
        r.M = std::stoi(fields[2]);
        r.estimator = fields[3];
        r.value = {std::stod(fields[4]), std::stod(fields[5])};
        if (!fields[6].empty()) r.std_error = std::stod(fields[6]);
        if (!fields[7].empty()) r.abs_error_vs_limit = std::stod(fields[7]);
        r.runtime_ms = std::stod(fields[8]);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::vector<ReportRow> parse_report_json(const std::string& text) {
    std::vector<ReportRow> rows;
    const nlohmann::json arr = nlohmann::json::parse(text);
    for (const auto& obj : arr) {
        ReportRow r;
        r.monomial = obj.at("monomial").get<std::string>();
        r.N = obj.at("N").get<int>();
        r.M = obj.at("M").get<int>();
        r.estimator = obj.at("estimator").get<std::string>();
        r.value = {obj.at("value_re").get<double>(), obj.at("value_im").get<double>()};
        if (!obj.at("stderr").is_null()) r.std_error = obj.at("stderr").get<double>();
        if (!obj.at("abs_error_vs_limit").is_null())
            r.abs_error_vs_limit = obj.at("abs_error_vs_limit").get<double>();
        r.runtime_ms = obj.at("runtime_ms").get<double>();
        if (obj.contains("exact")) r.exact_fraction = obj.at("exact").get<std::string>();
        rows.push_back(std::move(r));
    }
    return rows;
}

enum class ReportFormat { csv, json };

/// Writes the report to a file, or to stdout when path is "-".
inline void emit_report(const std::vector<ReportRow>& rows, ReportFormat format,
                        const std::string& path) {
    const std::string payload =
        format == ReportFormat::csv ? report_to_csv(rows) : report_to_json(rows);
    if (path == "-" || path.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << payload;
    if (!out) throw IoError("failed while writing '" + path + "'");
}

}  // namespace permfree
