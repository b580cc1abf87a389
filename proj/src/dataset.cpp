#include "oapel/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "oapel/error.hpp"

namespace oapel {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      throw DataError(path + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                      " cells, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(line_no);
  }
  if (t.header.empty()) throw DataError(path + ": empty file");
  return t;
}

double parse_cell(const std::string& cell, const std::string& path, int line, const std::string& column) {
  double v = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v))
    throw DataError(path + ": line " + std::to_string(line) + ", column '" + column + "': non-numeric value '" + cell + "'");
  return v;
}

}  // namespace

std::size_t Dataset::positives() const {
  std::size_t p = 0;
  for (int v : y) p += static_cast<std::size_t>(v == 1);
  return p;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset d;
  d.x = take_rows(x, rows);
  d.y = take(y, rows);
  d.feature_ids = feature_ids;
  for (auto r : rows) d.subject_ids.push_back(r < subject_ids.size() ? subject_ids[r] : std::to_string(r));
  if (scores) {
    std::vector<double> s;
    for (auto r : rows) s.push_back((*scores)[r]);
    d.scores = std::move(s);
  }
  return d;
}

void Dataset::validate() const {
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw DataError("dataset: row count does not match label count");
  if (static_cast<std::size_t>(x.cols()) != feature_ids.size())
    throw DataError("dataset: column count does not match feature id count");
  if (!subject_ids.empty() && subject_ids.size() != y.size())
    throw DataError("dataset: subject id count does not match row count");
  if (!x.allFinite()) throw DataError("dataset: non-finite feature value");
  for (int v : y)
    if (v != 0 && v != 1) throw DataError("dataset: labels must be 0/1");
  std::unordered_set<std::string> seen;
  for (const auto& id : feature_ids)
    if (!seen.insert(id).second) throw DataError("dataset: duplicate feature id '" + id + "'");
  seen.clear();
  for (const auto& id : subject_ids)
    if (!seen.insert(id).second) throw DataError("dataset: duplicate subject id '" + id + "'");
}

Dataset ingest_csv(const std::string& features_path, const std::string& labels_path, double label_threshold) {
  const auto feat = read_csv(features_path);
  if (feat.header[0] != "subject_id") throw DataError(features_path + ": first column must be 'subject_id'");
  const auto lab = read_csv(labels_path);
  if (lab.header.size() != 2 || lab.header[0] != "subject_id" || (lab.header[1] != "score" && lab.header[1] != "label"))
    throw DataError(labels_path + ": header must be 'subject_id,score' or 'subject_id,label'");
  const bool scored = lab.header[1] == "score";

  std::unordered_map<std::string, double> outcome;
  for (std::size_t r = 0; r < lab.rows.size(); ++r) {
    const auto& id = lab.rows[r][0];
    const double v = parse_cell(lab.rows[r][1], labels_path, lab.line_numbers[r], lab.header[1]);
    if (!scored && v != 0.0 && v != 1.0)
      throw DataError(labels_path + ": line " + std::to_string(lab.line_numbers[r]) + ": label must be 0 or 1");
    if (!outcome.emplace(id, v).second) throw DataError(labels_path + ": duplicate subject id '" + id + "'");
  }

  Dataset d;
  d.feature_ids.assign(feat.header.begin() + 1, feat.header.end());
  const auto n = feat.rows.size();
  d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d.feature_ids.size()));
  std::vector<double> scores;
  std::vector<std::string> missing;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = feat.rows[r];
    if (!seen.insert(row[0]).second) throw DataError(features_path + ": duplicate subject id '" + row[0] + "'");
    for (std::size_t c = 1; c < row.size(); ++c)
      d.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) =
          parse_cell(row[c], features_path, feat.line_numbers[r], feat.header[c]);
    d.subject_ids.push_back(row[0]);
    const auto it = outcome.find(row[0]);
    if (it == outcome.end()) {
      missing.push_back(row[0]);
      continue;
    }
    if (scored) {
      scores.push_back(it->second);
      d.y.push_back(it->second <= label_threshold ? 1 : 0);
    } else {
      d.y.push_back(static_cast<int>(it->second));
    }
  }
  if (!missing.empty()) {
    std::string msg = labels_path + ": no outcome for subject(s):";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }
  if (scored) d.scores = std::move(scores);
  d.validate();
  return d;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(const Dataset& data, const std::string& features_path, const std::string& labels_path) {
  data.validate();
  const auto id_of = [&](std::size_t r) { return r < data.subject_ids.size() ? data.subject_ids[r] : "s" + std::to_string(r); };
  {
    std::ofstream out(features_path);
    if (!out) throw DataError("cannot write '" + features_path + "'");
    out << "subject_id";
    for (const auto& id : data.feature_ids) out << ',' << id;
    out << '\n';
    for (Eigen::Index r = 0; r < data.x.rows(); ++r) {
      out << id_of(static_cast<std::size_t>(r));
      for (Eigen::Index c = 0; c < data.x.cols(); ++c) out << ',' << format_double(data.x(r, c));
      out << '\n';
    }
  }
  std::ofstream out(labels_path);
  if (!out) throw DataError("cannot write '" + labels_path + "'");
  out << (data.scores ? "subject_id,score\n" : "subject_id,label\n");
  for (std::size_t r = 0; r < data.size(); ++r)
    out << id_of(r) << ',' << (data.scores ? format_double((*data.scores)[r]) : std::to_string(data.y[r])) << '\n';
}

Standardizer Standardizer::fit(const Matrix& x) {
  Standardizer s;
  const auto n = static_cast<double>(x.rows());
  s.mean = x.colwise().mean().transpose();
  s.sd.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean(j)).square().sum() / n;
    const double sd = std::sqrt(var);
    s.sd(j) = sd < 1e-12 ? 1.0 : sd;
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  Matrix out = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j) out.col(j) = (x.col(j).array() - mean(j)) / sd(j);
  return out;
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean(static_cast<Eigen::Index>(j))) / sd(static_cast<Eigen::Index>(j));
  return out;
}

nlohmann::json to_json(const Standardizer& s) {
  return {{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
          {"sd", std::vector<double>(s.sd.data(), s.sd.data() + s.sd.size())}};
}

Standardizer standardizer_from_json(const nlohmann::json& j) {
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto sd = j.at("sd").get<std::vector<double>>();
  if (mean.size() != sd.size()) throw DataError("malformed standardizer JSON");
  Standardizer s;
  s.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  s.sd = Eigen::Map<const Vector>(sd.data(), static_cast<Eigen::Index>(sd.size()));
  return s;
}

}  // namespace oapel
