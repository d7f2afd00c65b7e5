#include "asru/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "asru/error.hpp"

namespace asru {

namespace fs = std::filesystem;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string labels_to_string(const std::vector<int>& labels) {
  std::string s;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(labels[i]);
  }
  return s;
}

std::vector<int> parse_labels(const std::string& s) {
  std::istringstream in(s);
  std::vector<int> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Io, "bad integer token '" + tok + "'");
    }
  }
  return out;
}

void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
  std::string s;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) s += ',';
      s += format_number(m(r, c));
    }
    s += '\n';
  }
  write_text_file(path, s);
}

Matrix read_matrix_csv(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorCode::Io, "bad number '" + cell + "' in " + path.string());
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorCode::Io, "ragged matrix in " + path.string());
    rows.push_back(std::move(row));
  }
  Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

namespace {

std::string sequences_to_text(const std::vector<std::vector<int>>& seqs) {
  std::string s;
  for (const auto& q : seqs) {
    s += labels_to_string(q);
    s += '\n';
  }
  return s;
}

std::vector<std::vector<int>> text_to_sequences(const std::string& text) {
  std::vector<std::vector<int>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(parse_labels(line));
  }
  return out;
}

}  // namespace

void write_corpus(const Corpus& c, const fs::path& dir, const std::string& stem) {
  write_text_file(dir / (stem + ".speech.txt"), sequences_to_text(c.speech));
  write_text_file(dir / (stem + ".text.txt"), sequences_to_text(c.text));
  nlohmann::ordered_json meta;
  meta["ngram"] = c.ngram;
  meta["blocks"] = c.blocks;
  meta["units_x"] = c.units_x;
  meta["units_y"] = c.units_y;
  meta["seed"] = c.seed;
  meta["matched"] = c.matched;
  meta["speech_sequences"] = c.speech.size();
  meta["text_sequences"] = c.text.size();
  write_text_file(dir / (stem + ".meta.json"), meta.dump(2) + "\n");
}

Corpus read_corpus(const fs::path& dir, const std::string& stem) {
  Corpus c;
  try {
    auto meta = nlohmann::json::parse(read_text_file(dir / (stem + ".meta.json")));
    c.ngram = meta.at("ngram").get<int>();
    c.blocks = meta.at("blocks").get<int>();
    c.units_x = meta.at("units_x").get<int>();
    c.units_y = meta.at("units_y").get<int>();
    c.seed = meta.at("seed").get<std::uint64_t>();
    c.matched = meta.at("matched").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Io, std::string("corpus metadata: ") + e.what());
  }
  c.speech = text_to_sequences(read_text_file(dir / (stem + ".speech.txt")));
  c.text = text_to_sequences(read_text_file(dir / (stem + ".text.txt")));
  if (c.matched && c.speech.size() != c.text.size())
    throw Error(ErrorCode::Io, "matched corpus has unequal speech/text counts");
  return c;
}

void write_recovered(const RecoveredAssignment& r, const fs::path& dir, const std::string& stem) {
  write_matrix_csv(dir / (stem + ".o_hat.csv"), r.o_hat);
  write_text_file(dir / (stem + ".decoded.txt"), labels_to_string(r.decoded) + "\n");
}

void write_trace_csv(const fs::path& path, const std::vector<TraceRow>& rows) {
  std::string s = "step,J,frobenius_residual,per\n";
  for (const auto& r : rows)
    s += std::to_string(r.step) + ',' + format_number(r.j) + ',' + format_number(r.residual) + ',' +
         (r.per < 0 ? std::string() : format_number(r.per)) + '\n';
  write_text_file(path, s);
}

void write_trajectory_csv(const fs::path& path, const std::vector<TrajectoryRow>& rows) {
  std::string s = "t,C_t,frobenius_residual,min_O_entry\n";
  for (const auto& r : rows)
    s += format_number(r.t) + ',' + format_number(r.c) + ',' + format_number(r.residual) + ',' +
         format_number(r.min_entry) + '\n';
  write_text_file(path, s);
}

void write_gap_report_csv(const fs::path& path, const std::vector<GapReportRow>& rows) {
  std::string s = "kind,a,b,value\n";
  for (const auto& r : rows)
    s += r.kind + ',' + format_number(r.a) + ',' + format_number(r.b) + ',' + format_number(r.value) + '\n';
  write_text_file(path, s);
}

}  // namespace asru
