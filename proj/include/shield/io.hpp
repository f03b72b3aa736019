#pragma once

#include <string>
#include <vector>

#include "shield/analysis.hpp"
#include "shield/record.hpp"
#include "shield/types.hpp"

namespace shield {

// Flat run summary mirroring the summary JSON (exactly these keys).
struct RunSummary {
    double min_h_tilde = 0.0; // worst audited tube value across paths
    double final_h = 0.0;     // worst final barrier value
    double total_energy = 0.0;
    double kl_estimate = 0.0;
    double kl_stderr = 0.0;
    long violations = 0;
    double energy_first_half_fraction = 0.0;
    long wall_ms = 0;
};

RunSummary make_summary(const std::vector<TrajectoryRecord>& records, const AuditReport& audit,
                        const KLReport& kl, long wall_ms);

std::string format_double(double v); // shortest exact decimal (%.17g trimmed)

void ensure_dir(const std::string& dir);

// per-step CSV: header k,t,h,h_tilde,epsilon,u_norm_sq,g,qp_status and one
// row per state, k descending
void write_trajectory_csv(const TrajectoryRecord& rec, const std::string& path);
std::string trajectory_csv_text(const TrajectoryRecord& rec);

void write_summary_json(const RunSummary& s, const std::string& path);
std::string summary_json_text(const RunSummary& s);

// aggregate per-step control-energy profile: k,t,mean_u_norm_sq
void write_profile_csv(const std::vector<TrajectoryRecord>& records, const EnergyProfile& prof,
                       const std::string& path);

// trajectory dataset export, columns z0_x,z0_y,z0_z,...,zL_z
void write_dataset_csv(const Mat& data, const std::string& path);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> numeric; // per row, status column excluded
    std::vector<std::string> qp_status;       // per row
};

CsvTable read_trajectory_csv(const std::string& path);

} // namespace shield
