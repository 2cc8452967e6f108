#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vhetnet/error.hpp"
#include "vhetnet/rng.hpp"

namespace vhetnet {

inline constexpr double kGridPitchM = 235.0;
inline constexpr int kMilanGridSide = 100;
inline constexpr int kMilanSquares = kMilanGridSide * kMilanGridSide;
inline constexpr unsigned kMinutesPerDay = 1440;

// ---------------------------------------------------------------------------
// CDR ingestion

// One row of the Milan telecommunications grid data. Missing activity
// columns are read as 0.
struct CdrRecord {
  int square_id = 0;
  std::int64_t interval_start_ms = 0;
  double sms_in = 0.0;
  double sms_out = 0.0;
  double call_in = 0.0;
  double call_out = 0.0;
  double internet = 0.0;
};

struct ParseIssue {
  std::size_t line = 0;
  std::string message;
};

struct CdrParseReport {
  std::size_t lines = 0;
  std::size_t records = 0;
  bool header_skipped = false;
  std::vector<ParseIssue> malformed;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  const char sep = line.find('\t') != std::string_view::npos ? '\t' : ',';
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

// Streams records from tab- or comma-separated text with columns
// square_id, interval_ms, country_code, sms_in, sms_out, call_in, call_out,
// internet. A non-numeric first line is taken as a header. Malformed lines are
// reported and skipped; an out-of-grid square id raises DataError.
template <typename Sink>
CdrParseReport parse_cdr(std::istream& in, Sink&& on_record, int max_square = kMilanSquares) {
  if (!in) throw DataError("CDR stream is not readable");
  CdrParseReport report;
  std::string line;
  while (std::getline(in, line)) {
    ++report.lines;
    const std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    const auto fields = detail::split_fields(view);

    long long square = 0;
    if (!detail::parse_number(fields[0], square)) {
      if (report.lines == 1) {
        report.header_skipped = true;
      } else {
        report.malformed.push_back({report.lines, "non-numeric square id"});
      }
      continue;
    }
    if (square < 1 || square > max_square)
      throw DataError("line " + std::to_string(report.lines) + ": square id " + std::to_string(square) +
                      " outside 1.." + std::to_string(max_square));
    if (fields.size() < 2 || fields.size() > 8) {
      report.malformed.push_back({report.lines, "expected 2 to 8 fields, got " + std::to_string(fields.size())});
      continue;
    }

    CdrRecord rec;
    rec.square_id = static_cast<int>(square);
    if (!detail::parse_number(fields[1], rec.interval_start_ms)) {
      report.malformed.push_back({report.lines, "bad interval timestamp"});
      continue;
    }
    // fields[2] is the country code; it is not used.
    double* slots[5] = {&rec.sms_in, &rec.sms_out, &rec.call_in, &rec.call_out, &rec.internet};
    bool ok = true;
    for (std::size_t f = 3; f < fields.size(); ++f) {
      if (detail::trim(fields[f]).empty()) continue;
      double v = 0.0;
      if (!detail::parse_number(fields[f], v) || !(v >= 0.0) || !std::isfinite(v)) {
        report.malformed.push_back({report.lines, "bad activity value in column " + std::to_string(f + 1)});
        ok = false;
        break;
      }
      *slots[f - 3] = v;
    }
    if (!ok) continue;
    ++report.records;
    on_record(rec);
  }
  if (in.bad()) throw DataError("CDR stream read failure");
  return report;
}

struct CdrParseResult {
  std::vector<CdrRecord> records;
  CdrParseReport report;
};

inline CdrParseResult parse_cdr(std::istream& in, int max_square = kMilanSquares) {
  CdrParseResult out;
  out.report = parse_cdr(in, [&](const CdrRecord& r) { out.records.push_back(r); }, max_square);
  return out;
}

// Coefficients for sms_in, sms_out, call_in, call_out, internet.
using ActivityWeights = std::array<double, 5>;
inline constexpr ActivityWeights kUnitWeights{1.0, 1.0, 1.0, 1.0, 1.0};

inline double combined_activity(const CdrRecord& r, const ActivityWeights& w) {
  return w[0] * r.sms_in + w[1] * r.sms_out + w[2] * r.call_in + w[3] * r.call_out + w[4] * r.internet;
}

// Rows are grid squares (ascending id), columns are time slots counted from
// the epoch.
struct ActivityMatrix {
  std::vector<int> squares;
  std::size_t slot_count = 0;
  std::vector<double> values;  // row-major
  std::size_t duplicate_cells = 0;  // cells that received more than one record
  std::size_t missing_cells = 0;    // cells with no record, filled with 0
  std::int64_t epoch_ms = 0;

  double at(std::size_t row, std::size_t slot) const { return values[row * slot_count + slot]; }
  double& at(std::size_t row, std::size_t slot) { return values[row * slot_count + slot]; }

  std::optional<std::size_t> row_of(int square) const {
    auto it = std::lower_bound(squares.begin(), squares.end(), square);
    if (it == squares.end() || *it != square) return std::nullopt;
    return static_cast<std::size_t>(it - squares.begin());
  }

  // Sub-matrix with the given squares as rows, in the given order.
  ActivityMatrix select(std::span<const int> rows_squares) const {
    ActivityMatrix out;
    out.slot_count = slot_count;
    out.epoch_ms = epoch_ms;
    for (int sq : rows_squares) {
      const auto r = row_of(sq);
      if (!r) throw DataError("square " + std::to_string(sq) + " has no activity data");
      out.squares.push_back(sq);
      out.values.insert(out.values.end(), values.begin() + static_cast<std::ptrdiff_t>(*r * slot_count),
                        values.begin() + static_cast<std::ptrdiff_t>((*r + 1) * slot_count));
    }
    return out;
  }
};

// Streaming accumulator behind aggregate_activity. Records sharing a square
// and slot are summed.
class ActivityAggregator {
 public:
  ActivityAggregator(const ActivityWeights& weights, unsigned slot_minutes = 10,
                     std::optional<std::int64_t> epoch_ms = std::nullopt,
                     std::optional<std::vector<int>> square_filter = std::nullopt)
      : weights_(weights), slot_ms_(static_cast<std::int64_t>(slot_minutes) * 60000), epoch_(epoch_ms) {
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("activity weights must be non-negative");
      sum += w;
    }
    if (!(sum > 0.0)) throw std::invalid_argument("activity weights must have a positive sum");
    if (slot_minutes == 0) throw std::invalid_argument("slot duration must be positive");
    if (square_filter) {
      filter_ = std::move(*square_filter);
      std::sort(filter_->begin(), filter_->end());
    }
  }

  void add(const CdrRecord& r) {
    if (filter_ && !std::binary_search(filter_->begin(), filter_->end(), r.square_id)) return;
    if (epoch_ && r.interval_start_ms < *epoch_)
      throw DataError("record at " + std::to_string(r.interval_start_ms) + " precedes the epoch");
    const std::int64_t slot = floor_div(r.interval_start_ms, slot_ms_);
    Cell& c = cells_[r.square_id][slot];
    c.sum += combined_activity(r, weights_);
    ++c.count;
  }

  ActivityMatrix finish() const {
    ActivityMatrix m;
    if (cells_.empty()) return m;
    std::int64_t lo = std::numeric_limits<std::int64_t>::max();
    std::int64_t hi = std::numeric_limits<std::int64_t>::min();
    for (const auto& [sq, row] : cells_) {
      lo = std::min(lo, row.begin()->first);
      hi = std::max(hi, row.rbegin()->first);
    }
    if (epoch_) lo = floor_div(*epoch_, slot_ms_);
    m.epoch_ms = lo * slot_ms_;
    m.slot_count = static_cast<std::size_t>(hi - lo + 1);
    m.values.assign(cells_.size() * m.slot_count, 0.0);
    std::size_t r = 0;
    for (const auto& [sq, row] : cells_) {
      m.squares.push_back(sq);
      for (const auto& [slot, cell] : row) {
        m.at(r, static_cast<std::size_t>(slot - lo)) = cell.sum;
        if (cell.count > 1) ++m.duplicate_cells;
      }
      m.missing_cells += m.slot_count - row.size();
      ++r;
    }
    return m;
  }

 private:
  struct Cell {
    double sum = 0.0;
    std::size_t count = 0;
  };

  static std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
  }

  ActivityWeights weights_;
  std::int64_t slot_ms_;
  std::optional<std::int64_t> epoch_;
  std::optional<std::vector<int>> filter_;
  std::map<int, std::map<std::int64_t, Cell>> cells_;
};

inline ActivityMatrix aggregate_activity(std::span<const CdrRecord> records, const ActivityWeights& weights,
                                         unsigned slot_minutes = 10,
                                         std::optional<std::int64_t> epoch_ms = std::nullopt) {
  ActivityAggregator agg(weights, slot_minutes, epoch_ms);
  for (const auto& r : records) agg.add(r);
  return agg.finish();
}

// ---------------------------------------------------------------------------
// Load series

// Per-SBS normalized load factors over consecutive time slots.
class LoadSeries {
 public:
  LoadSeries() = default;
  LoadSeries(std::size_t n_sbs, std::size_t n_slots, unsigned slot_minutes = 10)
      : n_sbs_(n_sbs), n_slots_(n_slots), slot_minutes_(slot_minutes), values_(n_sbs * n_slots, 0.0) {
    if (slot_minutes == 0 || kMinutesPerDay % slot_minutes != 0)
      throw std::invalid_argument("slot duration must divide 1440 minutes");
  }

  std::size_t sbs_count() const { return n_sbs_; }
  std::size_t slot_count() const { return n_slots_; }
  unsigned slot_minutes() const { return slot_minutes_; }
  std::size_t slots_per_day() const { return kMinutesPerDay / slot_minutes_; }
  std::size_t day_count() const { return n_slots_ / slots_per_day(); }

  double operator()(std::size_t sbs, std::size_t slot) const { return values_[sbs * n_slots_ + slot]; }
  double& operator()(std::size_t sbs, std::size_t slot) { return values_[sbs * n_slots_ + slot]; }

  std::span<const double> series(std::size_t sbs) const {
    return std::span<const double>(values_).subspan(sbs * n_slots_, n_slots_);
  }

  std::vector<double> slot_loads(std::size_t slot) const {
    std::vector<double> out(n_sbs_);
    for (std::size_t i = 0; i < n_sbs_; ++i) out[i] = (*this)(i, slot);
    return out;
  }

  // Keeps the first `slots` columns.
  LoadSeries truncated(std::size_t slots) const {
    if (slots > n_slots_) throw std::invalid_argument("cannot extend a series by truncation");
    LoadSeries out(n_sbs_, slots, slot_minutes_);
    for (std::size_t i = 0; i < n_sbs_; ++i)
      for (std::size_t t = 0; t < slots; ++t) out(i, t) = (*this)(i, t);
    return out;
  }

  void validate() const {
    for (double v : values_)
      if (!(v >= 0.0 && v <= 1.0)) throw DataError("load factor outside [0,1]");
  }

  const std::vector<double>& raw() const { return values_; }

  friend bool operator==(const LoadSeries&, const LoadSeries&) = default;

 private:
  std::size_t n_sbs_ = 0;
  std::size_t n_slots_ = 0;
  unsigned slot_minutes_ = 10;
  std::vector<double> values_;
};

enum class NormalizationMode { GlobalMax, PerSbsMax };

// Scales activity rows into [0,1], either by the maximum over the whole
// matrix or by each row's own maximum.
inline LoadSeries normalize_loads(const ActivityMatrix& activity, NormalizationMode mode,
                                  unsigned slot_minutes = 10) {
  const std::size_t rows = activity.slot_count == 0 ? 0 : activity.values.size() / activity.slot_count;
  double global = 0.0;
  for (double v : activity.values) global = std::max(global, v);
  if (!(global > 0.0)) throw DataError("activity is zero everywhere; normalization undefined");

  LoadSeries out(rows, activity.slot_count, slot_minutes);
  for (std::size_t r = 0; r < rows; ++r) {
    double scale = global;
    if (mode == NormalizationMode::PerSbsMax) {
      scale = 0.0;
      for (std::size_t t = 0; t < activity.slot_count; ++t) scale = std::max(scale, activity.at(r, t));
    }
    for (std::size_t t = 0; t < activity.slot_count; ++t)
      out(r, t) = scale > 0.0 ? activity.at(r, t) / scale : 0.0;
  }
  return out;
}

// Folds `days` consecutive days into one representative day by averaging
// each slot-of-day.
inline LoadSeries daily_average(const LoadSeries& series, std::size_t days) {
  const std::size_t spd = series.slots_per_day();
  if (days == 0 || series.slot_count() != days * spd)
    throw std::invalid_argument("series length " + std::to_string(series.slot_count()) + " is not " +
                                std::to_string(days) + " days of " + std::to_string(spd) + " slots");
  LoadSeries out(series.sbs_count(), spd, series.slot_minutes());
  for (std::size_t i = 0; i < series.sbs_count(); ++i) {
    for (std::size_t t = 0; t < spd; ++t) {
      double sum = 0.0;
      for (std::size_t d = 0; d < days; ++d) sum += series(i, d * spd + t);
      out(i, t) = sum / static_cast<double>(days);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Placement

struct Position {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct SbsPlacement {
  std::size_t sbs_id = 0;
  int square_id = 0;
  Position position;

  friend bool operator==(const SbsPlacement& a, const SbsPlacement& b) {
    return a.sbs_id == b.sbs_id && a.square_id == b.square_id && a.position.x == b.position.x &&
           a.position.y == b.position.y;
  }
};

// Grid-center coordinates of a 1-based, row-major square id.
inline Position square_center(int square_id, int grid_side = kMilanGridSide) {
  if (square_id < 1 || square_id > grid_side * grid_side)
    throw std::out_of_range("square id outside grid");
  const int idx = square_id - 1;
  return {(idx % grid_side + 0.5) * kGridPitchM, (idx / grid_side + 0.5) * kGridPitchM};
}

// Uniform draw of distinct squares, one per SBS.
inline std::vector<SbsPlacement> place_sbs(std::span<const int> candidate_squares, std::size_t n_sbs, Rng& rng,
                                           int grid_side = kMilanGridSide) {
  if (n_sbs > candidate_squares.size())
    throw std::invalid_argument("more SBSs than available grid squares");
  std::vector<int> squares(candidate_squares.begin(), candidate_squares.end());
  rng.partial_shuffle(std::span<int>(squares), n_sbs);
  std::vector<SbsPlacement> out(n_sbs);
  for (std::size_t i = 0; i < n_sbs; ++i) out[i] = {i, squares[i], square_center(squares[i], grid_side)};
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic traffic

// Smooth two-peak weekday shape with a night trough, in (0,1].
inline std::vector<double> default_diurnal_profile(std::size_t slots_per_day = 144) {
  constexpr double kPi = 3.14159265358979323846;
  std::vector<double> p(slots_per_day);
  for (std::size_t t = 0; t < slots_per_day; ++t) {
    const double h = 24.0 * (static_cast<double>(t) + 0.5) / static_cast<double>(slots_per_day);
    const double noon = std::exp(-std::pow((h - 12.5) / 3.0, 2.0));
    const double evening = 0.9 * std::exp(-std::pow((h - 19.0) / 2.5, 2.0));
    const double day = 0.5 * (1.0 - std::cos(2.0 * kPi * (h - 4.0) / 24.0));
    p[t] = std::min(1.0, 0.12 + 0.35 * day + 0.55 * std::max(noon, evening));
  }
  return p;
}

struct SynthOptions {
  std::uint64_t seed = 1;
  std::size_t n_sbs = 100;
  int grid_side = 30;
  double correlation_length_m = 1500.0;  // infinity gives a flat field
  std::vector<double> diurnal_profile = default_diurnal_profile(144);
  std::size_t days = 1;
  std::size_t bumps = 12;
  double floor = 0.1;   // minimum spatial factor
  double noise = 0.01;  // half-width of the uniform per-sample noise
  unsigned slot_minutes = 10;
};

struct SyntheticTraffic {
  LoadSeries loads;
  std::vector<SbsPlacement> placements;
  std::vector<double> spatial_factor;
};

// load(i, d, t) = clip(f_i * profile[t] + u, 0, 1) where f_i is a smooth
// field of Gaussian bumps sampled at the SBS position and u is uniform noise.
// Draw order: placements, bump centers and amplitudes, then noise in
// (day, slot, sbs) order.
inline SyntheticTraffic synthesize_traffic(const SynthOptions& opt) {
  const std::size_t spd = kMinutesPerDay / opt.slot_minutes;
  if (opt.diurnal_profile.size() != spd)
    throw std::invalid_argument("diurnal profile must have one value per slot of the day");
  if (opt.grid_side < 1) throw std::invalid_argument("grid side must be positive");
  const std::size_t squares = static_cast<std::size_t>(opt.grid_side) * static_cast<std::size_t>(opt.grid_side);
  if (opt.n_sbs > squares) throw std::invalid_argument("more SBSs than grid squares");
  if (!(opt.correlation_length_m > 0.0)) throw std::invalid_argument("correlation length must be positive");
  if (opt.days == 0 || opt.bumps == 0) throw std::invalid_argument("need at least one day and one bump");

  Rng rng(opt.seed);
  std::vector<int> ids(squares);
  for (std::size_t i = 0; i < squares; ++i) ids[i] = static_cast<int>(i) + 1;

  SyntheticTraffic out;
  out.placements = place_sbs(ids, opt.n_sbs, rng, opt.grid_side);

  const double extent = opt.grid_side * kGridPitchM;
  std::vector<Position> centers(opt.bumps);
  std::vector<double> amplitude(opt.bumps);
  for (std::size_t b = 0; b < opt.bumps; ++b) {
    centers[b] = {rng.uniform(0.0, extent), rng.uniform(0.0, extent)};
    amplitude[b] = rng.uniform(0.3, 1.0);
  }

  out.spatial_factor.resize(opt.n_sbs);
  const double two_l2 = 2.0 * opt.correlation_length_m * opt.correlation_length_m;
  double fmax = 0.0;
  for (std::size_t i = 0; i < opt.n_sbs; ++i) {
    double f = 0.0;
    for (std::size_t b = 0; b < opt.bumps; ++b) {
      const double d = distance(out.placements[i].position, centers[b]);
      f += amplitude[b] * (std::isinf(two_l2) ? 1.0 : std::exp(-d * d / two_l2));
    }
    out.spatial_factor[i] = f;
    fmax = std::max(fmax, f);
  }
  for (double& f : out.spatial_factor) f = opt.floor + (1.0 - opt.floor) * (fmax > 0.0 ? f / fmax : 1.0);

  out.loads = LoadSeries(opt.n_sbs, opt.days * spd, opt.slot_minutes);
  for (std::size_t d = 0; d < opt.days; ++d) {
    for (std::size_t t = 0; t < spd; ++t) {
      for (std::size_t i = 0; i < opt.n_sbs; ++i) {
        const double u = rng.uniform(-opt.noise, opt.noise);
        const double v = out.spatial_factor[i] * opt.diurnal_profile[t] + u;
        out.loads(i, d * spd + t) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sleeping-SBS masking

// Per-SBS loads at one slot in which sleeping SBSs are unobserved. Reading
// the load of a sleeping SBS is a logic error.
class LoadSnapshot {
 public:
  LoadSnapshot() = default;
  LoadSnapshot(std::vector<double> loads, std::vector<bool> known, std::size_t slot_of_day = 0)
      : loads_(std::move(loads)), known_(std::move(known)), slot_(slot_of_day) {
    if (loads_.size() != known_.size()) throw std::invalid_argument("load/mask length mismatch");
    for (std::size_t i = 0; i < loads_.size(); ++i) {
      if (!known_[i]) {
        loads_[i] = std::numeric_limits<double>::quiet_NaN();
      } else if (!(loads_[i] >= 0.0 && loads_[i] <= 1.0)) {
        throw std::domain_error("observed load outside [0,1]");
      }
    }
  }

  // All SBSs observed.
  static LoadSnapshot fully_known(std::vector<double> loads, std::size_t slot_of_day = 0) {
    std::vector<bool> known(loads.size(), true);
    return LoadSnapshot(std::move(loads), std::move(known), slot_of_day);
  }

  std::size_t size() const { return loads_.size(); }
  std::size_t slot_of_day() const { return slot_; }
  bool known(std::size_t i) const { return known_.at(i); }
  const std::vector<bool>& known_mask() const { return known_; }

  double load(std::size_t i) const {
    if (!known_.at(i)) throw std::logic_error("load of sleeping SBS " + std::to_string(i) + " is unknown");
    return loads_[i];
  }

  std::vector<std::size_t> active_ids() const { return ids_where(true); }
  std::vector<std::size_t> sleeping_ids() const { return ids_where(false); }

 private:
  std::vector<std::size_t> ids_where(bool k) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < known_.size(); ++i)
      if (known_[i] == k) out.push_back(i);
    return out;
  }

  std::vector<double> loads_;
  std::vector<bool> known_;
  std::size_t slot_ = 0;
};

// Snapshot plus the withheld true loads of the sleepers (ascending id).
struct MaskedSlot {
  LoadSnapshot snapshot;
  std::vector<std::size_t> sleeping;
  std::vector<double> truth;
};

inline MaskedSlot mask_sleepers(std::span<const double> slot_loads, std::span<const std::size_t> sleeping_ids,
                                std::size_t slot_of_day = 0) {
  std::vector<bool> known(slot_loads.size(), true);
  for (std::size_t id : sleeping_ids) {
    if (id >= slot_loads.size()) throw std::out_of_range("unknown SBS id " + std::to_string(id));
    known[id] = false;
  }
  MaskedSlot out;
  for (std::size_t i = 0; i < known.size(); ++i) {
    if (!known[i]) {
      out.sleeping.push_back(i);
      out.truth.push_back(slot_loads[i]);
    }
  }
  if (!slot_loads.empty() && out.sleeping.size() == slot_loads.size())
    throw std::invalid_argument("every SBS is sleeping; nothing to interpolate from");
  out.snapshot = LoadSnapshot(std::vector<double>(slot_loads.begin(), slot_loads.end()), std::move(known), slot_of_day);
  return out;
}

}  // namespace vhetnet
