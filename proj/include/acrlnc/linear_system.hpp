#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace acrlnc {

using Bytes = std::vector<std::uint8_t>;

// Coefficient matrix over GF(2^8) kept in reduced row-echelon form, with an
// optional payload attached to every row. Rows are inserted one at a time;
// each insertion costs a single elimination pass against the current basis.
//
// Columns are positions in a decoding window. Re-anchoring (drop_leading)
// removes solved leading columns so the matrix tracks only the undecoded part
// of a stream.
class CoeffMatrix {
 public:
  explicit CoeffMatrix(std::size_t cols = 0, std::size_t payload_size = 0);

  // Reduces the row against the basis and keeps it if it is independent.
  // Returns true iff the rank increased. Throws InvalidInput on a length
  // mismatch and CorruptionError when the row reduces to zero coefficients
  // but a nonzero payload (an inconsistent system).
  bool insert_row(std::span<const std::uint8_t> coeffs,
                  std::span<const std::uint8_t> payload = {}, std::uint64_t tag = 0);

  std::size_t rank() const { return rows_.size(); }
  std::size_t cols() const { return cols_; }
  std::size_t payload_size() const { return payload_size_; }

  // Length of the longest column prefix whose unit vectors lie in the row
  // space, i.e. how many leading unknowns are solved.
  std::size_t decodable_prefix() const;

  // Payload of a solved column; col must be below decodable_prefix().
  std::span<const std::uint8_t> solved_payload(std::size_t col) const;

  // Removes the first n columns (all solved) and the rows pivoting on them.
  void drop_leading(std::size_t n);

  // Appends zero columns.
  void extend_cols(std::size_t new_cols);

  // Tags of the kept rows, in basis order.
  std::vector<std::uint64_t> tags() const;

  // Current basis rows, for inspection.
  std::vector<Bytes> basis() const;

 private:
  struct Row {
    Bytes coeffs;
    Bytes payload;
    std::size_t pivot = 0;
    std::uint64_t tag = 0;
  };

  bool is_unit_row(const Row& r) const;

  std::size_t cols_;
  std::size_t payload_size_;
  std::vector<Row> rows_;
  std::vector<int> pivot_row_;  // column -> index into rows_, or -1
};

// Solves rows (each paired with payloads[i]) and returns the payloads of the
// longest decodable prefix of window positions. Throws CorruptionError if the
// system is inconsistent and InvalidInput on ragged input.
std::vector<Bytes> solve_in_order(std::span<const Bytes> rows, std::span<const Bytes> payloads);

}  // namespace acrlnc
