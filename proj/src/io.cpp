#include "shield/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include "shield/errors.hpp"
#include "shield/qp.hpp"

namespace shield {

std::string format_double(double v) {
    char buf[40];
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return buf;
    }
    // shortest decimal that parses back to the same bits, capped at %.17g
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

RunSummary make_summary(const std::vector<TrajectoryRecord>& records, const AuditReport& audit,
                        const KLReport& kl, long wall_ms) {
    RunSummary s;
    s.min_h_tilde = audit.worst_min_h_tilde;
    s.final_h = audit.worst_final_h;
    double energy = 0.0;
    for (const auto& r : records) energy += r.total_energy;
    s.total_energy = records.empty() ? 0.0 : energy / static_cast<double>(records.size());
    s.kl_estimate = kl.estimate;
    s.kl_stderr = kl.std_error;
    s.violations = audit.violations;
    s.energy_first_half_fraction = audit.energy_first_half_fraction;
    s.wall_ms = wall_ms;
    return s;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IOError("cannot create directory " + dir + ": " + ec.message());
}

std::string trajectory_csv_text(const TrajectoryRecord& rec) {
    std::string out = "k,t,h,h_tilde,epsilon,u_norm_sq,g,qp_status\n";
    for (const auto& s : rec.steps) {
        out += std::to_string(s.k);
        out += ',';
        out += format_double(s.t);
        out += ',';
        out += format_double(s.h);
        out += ',';
        out += format_double(s.h_tilde);
        out += ',';
        out += format_double(s.epsilon);
        out += ',';
        out += format_double(s.u_norm_sq);
        out += ',';
        out += format_double(s.g);
        out += ',';
        out += qp_method_name(s.qp);
        out += '\n';
    }
    return out;
}

static void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IOError("cannot open " + path + " for writing");
    f << text;
    if (!f) throw IOError("write failed for " + path);
}

void write_trajectory_csv(const TrajectoryRecord& rec, const std::string& path) {
    write_text(path, trajectory_csv_text(rec));
}

std::string summary_json_text(const RunSummary& s) {
    std::string out = "{\n";
    out += "  \"min_h_tilde\": " + format_double(s.min_h_tilde) + ",\n";
    out += "  \"final_h\": " + format_double(s.final_h) + ",\n";
    out += "  \"total_energy\": " + format_double(s.total_energy) + ",\n";
    out += "  \"kl_estimate\": " + format_double(s.kl_estimate) + ",\n";
    out += "  \"kl_stderr\": " + format_double(s.kl_stderr) + ",\n";
    out += "  \"violations\": " + std::to_string(s.violations) + ",\n";
    out += "  \"energy_first_half_fraction\": " + format_double(s.energy_first_half_fraction) + ",\n";
    out += "  \"wall_ms\": " + std::to_string(s.wall_ms) + "\n";
    out += "}\n";
    return out;
}

void write_summary_json(const RunSummary& s, const std::string& path) {
    write_text(path, summary_json_text(s));
}

void write_profile_csv(const std::vector<TrajectoryRecord>& records, const EnergyProfile& prof,
                       const std::string& path) {
    std::string out = "k,t,mean_u_norm_sq\n";
    if (!records.empty()) {
        const auto& steps = records.front().steps;
        // profile entry i corresponds to the control applied at steps[i] (k = K-i)
        for (std::size_t i = 0; i < prof.mean_u_norm_sq.size(); ++i) {
            out += std::to_string(steps[i].k);
            out += ',';
            out += format_double(steps[i].t);
            out += ',';
            out += format_double(prof.mean_u_norm_sq[i]);
            out += '\n';
        }
    }
    write_text(path, out);
}

void write_dataset_csv(const Mat& data, const std::string& path) {
    if (data.cols() % 3 != 0) throw ValidationError("dataset rows must be flattened xyz triples");
    const long steps = data.cols() / 3;
    std::string out;
    for (long s = 0; s < steps; ++s) {
        for (int a = 0; a < 3; ++a) {
            if (s || a) out += ',';
            out += 'z' + std::to_string(s);
            out += '_';
            out += "xyz"[a];
        }
    }
    out += '\n';
    for (long r = 0; r < data.rows(); ++r) {
        for (long c = 0; c < data.cols(); ++c) {
            if (c) out += ',';
            out += format_double(data(r, c));
        }
        out += '\n';
    }
    write_text(path, out);
}

static std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

CsvTable read_trajectory_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IOError("cannot open " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(f, line)) throw ParseError(path + ": missing header");
    table.columns = split_csv_line(line);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != table.columns.size())
            throw ParseError(path + ": row has " + std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(table.columns.size()));
        std::vector<double> row;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (table.columns[i] == "qp_status") {
                table.qp_status.push_back(fields[i]);
            } else {
                try {
                    row.push_back(std::stod(fields[i]));
                } catch (const std::exception&) {
                    throw ParseError(path + ": bad numeric field \"" + fields[i] + "\"");
                }
            }
        }
        table.numeric.push_back(std::move(row));
    }
    return table;
}

} // namespace shield
