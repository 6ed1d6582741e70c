#include "ivnnt/domain.hpp"

#include <algorithm>
#include <sstream>

namespace ivnnt {

namespace {

bool is_binary(double v) { return v == 0.0 || v == 1.0; }

CellCounts tabulate(const std::vector<ObservationRecord>& records) {
  CellCounts c;
  for (const auto& r : records) {
    c.n[r.z][r.a] += 1;
    c.ones[r.z][r.a] += r.i;
  }
  c.total = static_cast<std::int64_t>(records.size());
  return c;
}

}  // namespace

ObservationSet ObservationSet::validate(const std::vector<RawObservation>& raw) {
  if (raw.empty()) {
    ValidationError err("dataset validation failed: empty dataset");
    err.empty_dataset = true;
    throw err;
  }
  ValidationError err("dataset validation failed");
  std::vector<ObservationRecord> records;
  records.reserve(raw.size());
  for (std::size_t idx = 0; idx < raw.size(); ++idx) {
    const auto& r = raw[idx];
    if (!is_binary(r.z) || !is_binary(r.a) || !is_binary(r.i)) {
      err.non_binary_rows.push_back(idx);
      continue;
    }
    records.push_back({static_cast<std::uint8_t>(r.z), static_cast<std::uint8_t>(r.a),
                       static_cast<std::uint8_t>(r.i)});
  }
  CellCounts cells = tabulate(records);
  for (int z = 0; z < 2; ++z)
    for (int a = 0; a < 2; ++a)
      if (cells.n[z][a] == 0) err.empty_cells.emplace_back(z, a);

  if (!err.non_binary_rows.empty() || !err.empty_cells.empty()) {
    std::ostringstream msg;
    msg << "dataset validation failed:";
    if (!err.non_binary_rows.empty()) {
      msg << " " << err.non_binary_rows.size() << " non-binary row(s) [first at index "
          << err.non_binary_rows.front() << "]";
    }
    for (const auto& [z, a] : err.empty_cells) {
      msg << " empty cell (z=" << z << ",a=" << a << ")";
    }
    ValidationError out(msg.str());
    out.non_binary_rows = std::move(err.non_binary_rows);
    out.empty_cells = std::move(err.empty_cells);
    throw out;
  }

  ObservationSet set;
  set.records_ = std::move(records);
  set.cells_ = cells;
  return set;
}

ObservationSet ObservationSet::from_records_unchecked(std::vector<ObservationRecord> records) {
  ObservationSet set;
  set.cells_ = tabulate(records);
  set.records_ = std::move(records);
  return set;
}

std::array<double, ThetaVector::dim> theta_pack(const ThetaVector& t) {
  return {t.beta[0], t.beta[1], t.beta[2], t.beta[3], t.pi_z, t.psi0, t.psi1,
          t.pb0, t.pb1, t.pb, t.nne, t.ein, t.nnt};
}

ThetaVector theta_unpack(std::span<const double> v) {
  if (v.size() != ThetaVector::dim) throw LengthMismatchError(ThetaVector::dim, v.size());
  ThetaVector t;
  t.beta = {v[0], v[1], v[2], v[3]};
  t.pi_z = v[4];
  t.psi0 = v[5];
  t.psi1 = v[6];
  t.pb0 = v[7];
  t.pb1 = v[8];
  t.pb = v[9];
  t.nne = v[10];
  t.ein = v[11];
  t.nnt = v[12];
  return t;
}

}  // namespace ivnnt
