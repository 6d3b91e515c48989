#include "acrlnc/linear_system.hpp"

#include <algorithm>
#include <string>

#include "acrlnc/errors.hpp"
#include "acrlnc/gf256.hpp"

namespace acrlnc {

CoeffMatrix::CoeffMatrix(std::size_t cols, std::size_t payload_size)
    : cols_(cols), payload_size_(payload_size), pivot_row_(cols, -1) {}

bool CoeffMatrix::insert_row(std::span<const std::uint8_t> coeffs,
                             std::span<const std::uint8_t> payload, std::uint64_t tag) {
  if (coeffs.size() != cols_) {
    throw InvalidInput("insert_row: row has " + std::to_string(coeffs.size()) +
                       " coefficients, matrix has " + std::to_string(cols_) + " columns");
  }
  if (payload.size() != payload_size_) {
    throw InvalidInput("insert_row: payload length " + std::to_string(payload.size()) +
                       " != " + std::to_string(payload_size_));
  }

  Row row{Bytes(coeffs.begin(), coeffs.end()), Bytes(payload.begin(), payload.end()), 0, tag};
  for (const Row& r : rows_) {
    const std::uint8_t c = row.coeffs[r.pivot];
    if (c == 0) continue;
    gf::axpy(row.coeffs, r.coeffs, c);
    gf::axpy(row.payload, r.payload, c);
  }

  const auto it = std::find_if(row.coeffs.begin(), row.coeffs.end(),
                               [](std::uint8_t x) { return x != 0; });
  if (it == row.coeffs.end()) {
    if (!gf::is_zero(row.payload)) {
      throw CorruptionError("insert_row: dependent combination carries a different payload");
    }
    return false;
  }

  row.pivot = static_cast<std::size_t>(it - row.coeffs.begin());
  const std::uint8_t norm = gf::inv(*it);
  gf::scale(row.coeffs, norm);
  gf::scale(row.payload, norm);

  for (Row& r : rows_) {
    const std::uint8_t c = r.coeffs[row.pivot];
    if (c == 0) continue;
    gf::axpy(r.coeffs, row.coeffs, c);
    gf::axpy(r.payload, row.payload, c);
  }

  pivot_row_[row.pivot] = static_cast<int>(rows_.size());
  rows_.push_back(std::move(row));
  return true;
}

bool CoeffMatrix::is_unit_row(const Row& r) const {
  for (std::size_t j = 0; j < cols_; ++j) {
    if (j != r.pivot && r.coeffs[j] != 0) return false;
  }
  return true;
}

std::size_t CoeffMatrix::decodable_prefix() const {
  std::size_t n = 0;
  while (n < cols_ && pivot_row_[n] >= 0 && is_unit_row(rows_[pivot_row_[n]])) ++n;
  return n;
}

std::span<const std::uint8_t> CoeffMatrix::solved_payload(std::size_t col) const {
  if (col >= cols_ || pivot_row_[col] < 0 || !is_unit_row(rows_[pivot_row_[col]])) {
    throw InvalidInput("solved_payload: column is not solved");
  }
  return rows_[pivot_row_[col]].payload;
}

void CoeffMatrix::drop_leading(std::size_t n) {
  if (n == 0) return;
  if (n > decodable_prefix()) throw InvalidInput("drop_leading: columns not solved");

  std::erase_if(rows_, [n](const Row& r) { return r.pivot < n; });
  for (Row& r : rows_) {
    r.coeffs.erase(r.coeffs.begin(), r.coeffs.begin() + static_cast<std::ptrdiff_t>(n));
    r.pivot -= n;
  }
  cols_ -= n;
  pivot_row_.assign(cols_, -1);
  for (std::size_t i = 0; i < rows_.size(); ++i) pivot_row_[rows_[i].pivot] = static_cast<int>(i);
}

void CoeffMatrix::extend_cols(std::size_t new_cols) {
  if (new_cols <= cols_) return;
  for (Row& r : rows_) r.coeffs.resize(new_cols, 0);
  pivot_row_.resize(new_cols, -1);
  cols_ = new_cols;
}

std::vector<std::uint64_t> CoeffMatrix::tags() const {
  std::vector<std::uint64_t> out;
  out.reserve(rows_.size());
  for (const Row& r : rows_) out.push_back(r.tag);
  return out;
}

std::vector<Bytes> CoeffMatrix::basis() const {
  std::vector<Bytes> out;
  out.reserve(rows_.size());
  for (const Row& r : rows_) out.push_back(r.coeffs);
  return out;
}

std::vector<Bytes> solve_in_order(std::span<const Bytes> rows, std::span<const Bytes> payloads) {
  if (rows.size() != payloads.size()) throw InvalidInput("solve_in_order: rows/payloads size mismatch");
  if (rows.empty()) return {};

  CoeffMatrix m(rows.front().size(), payloads.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.insert_row(rows[i], payloads[i]);

  const std::size_t n = m.decodable_prefix();
  std::vector<Bytes> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto p = m.solved_payload(j);
    out.emplace_back(p.begin(), p.end());
  }
  return out;
}

}  // namespace acrlnc
