#include "minnorm/csv.hpp"

#include <charconv>
#include <fstream>
#include <map>

#include "minnorm/errors.hpp"

namespace minnorm {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool to_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

}  // namespace

std::string format_number(double x) {
  if (x == 0) x = 0;  // drop the sign of -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

JointSpectrum read_spectrum_csv(const std::string& path) {
  auto in = open(path);
  std::string line;
  std::map<std::string, std::size_t> col;
  while (std::getline(in, line) && trim(line).empty()) {
  }
  const auto header = split_csv_line(line);
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"lam1", "lam2", "weight"})
    if (!col.count(need)) throw InputError(path + ": spectrum header lacks column " + need);

  JointSpectrum H;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw InputError(path + ":" + std::to_string(lineno) + ": wrong number of fields");
    SpectrumAtom at;
    if (!to_double(f[col["lam1"]], at.lam1) || !to_double(f[col["lam2"]], at.lam2) ||
        !to_double(f[col["weight"]], at.weight))
      throw InputError(path + ":" + std::to_string(lineno) + ": non-numeric field");
    H.atoms.push_back(at);
  }
  H.validate();
  return H;
}

Matrix read_matrix_csv(const std::string& path) {
  auto in = open(path);
  std::string line;
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    std::vector<double> vals(f.size());
    bool numeric = true;
    for (std::size_t i = 0; i < f.size(); ++i) numeric = numeric && to_double(f[i], vals[i]);
    if (!numeric) {
      if (rows.empty() && lineno == 1) continue;  // header
      throw InputError(path + ":" + std::to_string(lineno) + ": non-numeric field");
    }
    if (!rows.empty() && vals.size() != rows.front().size())
      throw InputError(path + ":" + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw InputError(path + ": no data rows");
  Matrix M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j) M(i, j) = rows[i][j];
  return M;
}

void read_regression_csv(const std::string& path, Matrix& X, Vector& y) {
  const Matrix M = read_matrix_csv(path);
  if (M.cols() < 2) throw InputError(path + ": need at least one feature column and a response");
  X = M.leftCols(M.cols() - 1);
  y = M.col(M.cols() - 1);
}

}  // namespace minnorm
