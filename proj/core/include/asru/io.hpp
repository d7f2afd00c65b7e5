#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "asru/asymptotic.hpp"
#include "asru/gan.hpp"
#include "asru/hmm.hpp"
#include "asru/ntk.hpp"
#include "asru/smrm.hpp"

namespace asru {

// %.9g; "nan"/"inf" spelled out.
std::string format_number(double v);

std::string labels_to_string(const std::vector<int>& labels);
std::vector<int> parse_labels(const std::string& s);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

// <dir>/<stem>.speech.txt, <stem>.text.txt and <stem>.meta.json
void write_corpus(const Corpus& c, const std::filesystem::path& dir, const std::string& stem);
Corpus read_corpus(const std::filesystem::path& dir, const std::string& stem);

void write_recovered(const RecoveredAssignment& r, const std::filesystem::path& dir, const std::string& stem);

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& rows);
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectoryRow>& rows);
void write_gap_report_csv(const std::filesystem::path& path, const std::vector<GapReportRow>& rows);

}  // namespace asru
