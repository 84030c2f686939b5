#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "errors.hpp"
#include "instance_io.hpp"

namespace infoshare {

inline constexpr double kEarthRadiusM = 6'371'008.8;
inline constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

struct PoIRecord {
  std::string id;
  double latitude = 0.0;
  double longitude = 0.0;
};

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

struct BoundingBox {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;

  bool strictly_contains(double lat, double lon) const {
    return lat > lat_min && lat < lat_max && lon > lon_min && lon < lon_max;
  }

  /// Parses "lat_min,lat_max,lon_min,lon_max".
  static BoundingBox parse(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    for (std::string t; std::getline(ss, t, ',');) v.push_back(std::stod(t));
    if (v.size() != 4) throw std::invalid_argument("bounding box needs four comma-separated values");
    BoundingBox b{v[0], v[1], v[2], v[3]};
    if (!(b.lat_min < b.lat_max && b.lon_min < b.lon_max)) {
      throw std::invalid_argument("bounding box minimum must be below maximum");
    }
    return b;
  }
};

/// Central Los Angeles study region: 34d3'37"N..34d5'59"N, 118d24'18"W..118d14'28"W.
inline BoundingBox central_la_box() {
  return {34.0 + 3.0 / 60 + 37.0 / 3600, 34.0 + 5.0 / 60 + 59.0 / 3600,
          -(118.0 + 24.0 / 60 + 18.0 / 3600), -(118.0 + 14.0 / 60 + 28.0 / 3600)};
}

inline double haversine_m(LatLon a, LatLon b) {
  const double dlat = (b.lat - a.lat) * kDegToRad;
  const double dlon = (b.lon - a.lon) * kDegToRad;
  const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.lat * kDegToRad) * std::cos(b.lat * kDegToRad) * std::sin(dlon / 2) *
                       std::sin(dlon / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(s)));
}

/// Great-circle distance from p to segment [a, b]. The closest point is found
/// in a local equirectangular frame centred on p and the distance to that
/// interpolated point is measured with the haversine formula.
inline double point_segment_distance_m(LatLon p, LatLon a, LatLon b) {
  const double kx = std::cos(p.lat * kDegToRad);
  const double ax = (a.lon - p.lon) * kx;
  const double ay = a.lat - p.lat;
  const double bx = (b.lon - p.lon) * kx;
  const double by = b.lat - p.lat;
  const double dx = bx - ax;
  const double dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? -(ax * dx + ay * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const LatLon q{a.lat + t * (b.lat - a.lat), a.lon + t * (b.lon - a.lon)};
  return haversine_m(p, q);
}

struct Corridor {
  std::string name;
  std::vector<LatLon> polyline;

  void validate() const {
    if (polyline.size() < 2) throw std::invalid_argument("corridor " + name + " needs at least 2 waypoints");
    for (std::size_t t = 1; t < polyline.size(); ++t) {
      if (polyline[t].lat == polyline[t - 1].lat && polyline[t].lon == polyline[t - 1].lon) {
        throw std::invalid_argument("corridor " + name + " repeats a waypoint");
      }
    }
  }

  double distance_m(LatLon p) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t t = 1; t < polyline.size(); ++t) {
      d = std::min(d, point_segment_distance_m(p, polyline[t - 1], polyline[t]));
    }
    return d;
  }
};

/// Corridor file: one [name] section per corridor, then "lat lon" lines.
inline std::vector<Corridor> parse_corridors(std::istream& in) {
  const auto doc = ConfigDocument::parse(in);
  std::vector<Corridor> out;
  for (const auto& name : doc.section_names()) {
    Corridor c;
    c.name = name;
    for (const auto& l : doc.lines(name)) {
      const auto tok = split_ws(l.text);
      if (tok.size() != 2) throw ParseError(l.number, name, "expected 'lat lon'");
      c.polyline.push_back({parse_double(tok[0], l.number, "lat"), parse_double(tok[1], l.number, "lon")});
    }
    c.validate();
    out.push_back(std::move(c));
  }
  if (out.empty()) throw EmptyInputError("no corridors defined");
  return out;
}

inline std::vector<Corridor> load_corridors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corridor file " + path);
  return parse_corridors(in);
}

struct CorridorCounts {
  std::vector<std::size_t> counts;
  std::size_t unassigned = 0;
};

/// Snaps each record to the nearest corridor within max_snap_m; ties go to
/// the lower corridor index.
inline CorridorCounts assign_pois_to_corridors(const std::vector<PoIRecord>& records,
                                               const std::vector<Corridor>& corridors,
                                               double max_snap_m = 250.0) {
  if (corridors.empty()) throw std::invalid_argument("no corridors");
  if (!(max_snap_m > 0.0)) throw std::invalid_argument("snap distance must be positive");
  CorridorCounts out;
  out.counts.assign(corridors.size(), 0);
  for (const auto& r : records) {
    const LatLon p{r.latitude, r.longitude};
    std::size_t best = corridors.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < corridors.size(); ++c) {
      const double d = corridors[c].distance_m(p);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (best_d <= max_snap_m) {
      ++out.counts[best];
    } else {
      ++out.unassigned;
    }
  }
  return out;
}

/// Which columns hold the id, latitude and longitude. Each is either a
/// 0-based index or a header name.
struct ColumnSpec {
  std::string id = "0";
  std::string lat = "1";
  std::string lon = "2";
  char delimiter = ',';
  bool header = true;
  bool dedupe = false;

  /// Parses "id=<col>,lat=<col>,lon=<col>[,delim=<c>][,header=0|1][,dedupe=0|1]".
  /// Use "delim=tab" for tab-separated files.
  static ColumnSpec parse(const std::string& text) {
    ColumnSpec spec;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("column spec item needs key=value: " + item);
      const std::string key = item.substr(0, eq);
      const std::string val = item.substr(eq + 1);
      if (key == "id") spec.id = val;
      else if (key == "lat") spec.lat = val;
      else if (key == "lon") spec.lon = val;
      else if (key == "delim") spec.delimiter = val == "tab" ? '\t' : (val.empty() ? ',' : val[0]);
      else if (key == "header") spec.header = val != "0";
      else if (key == "dedupe") spec.dedupe = val != "0";
      else throw std::invalid_argument("unknown column spec key: " + key);
    }
    return spec;
  }
};

struct IngestResult {
  std::vector<PoIRecord> records;
  std::size_t rows = 0;
  std::size_t malformed = 0;
  std::size_t outside = 0;
  std::size_t duplicates = 0;
};

/// Splits one delimited line, honouring double-quoted fields.
inline std::vector<std::string> split_delimited(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == delim) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::optional<double> to_double(const std::string& s) {
  const std::string t = ConfigDocument::trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

/// Reads PoI rows and keeps those strictly inside the box. Unparsable rows
/// are counted, not fatal.
inline IngestResult ingest_poi_csv(const std::string& path, const BoundingBox& box, const ColumnSpec& spec = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  IngestResult out;
  std::string line;
  std::size_t id_col = 0;
  std::size_t lat_col = 0;
  std::size_t lon_col = 0;
  auto resolve = [](const std::string& want, const std::vector<std::string>& header) -> std::size_t {
    bool numeric = !want.empty() && std::all_of(want.begin(), want.end(), ::isdigit);
    if (numeric) return static_cast<std::size_t>(std::stoul(want));
    for (std::size_t c = 0; c < header.size(); ++c)
      if (ConfigDocument::trim(header[c]) == want) return c;
    throw std::invalid_argument("column '" + want + "' not found in header");
  };
  std::vector<std::string> header;
  if (spec.header) {
    if (!std::getline(in, line)) throw EmptyInputError("empty file " + path);
    header = split_delimited(line, spec.delimiter);
  }
  id_col = resolve(spec.id, header);
  lat_col = resolve(spec.lat, header);
  lon_col = resolve(spec.lon, header);

  std::unordered_set<std::string> seen;
  std::size_t parsed = 0;
  while (std::getline(in, line)) {
    if (ConfigDocument::trim(line).empty()) continue;
    ++out.rows;
    const auto f = split_delimited(line, spec.delimiter);
    const std::size_t need = std::max({id_col, lat_col, lon_col});
    if (f.size() <= need) {
      ++out.malformed;
      continue;
    }
    const auto lat = to_double(f[lat_col]);
    const auto lon = to_double(f[lon_col]);
    if (!lat || !lon || *lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0) {
      ++out.malformed;
      continue;
    }
    ++parsed;
    if (!box.strictly_contains(*lat, *lon)) {
      ++out.outside;
      continue;
    }
    PoIRecord r{ConfigDocument::trim(f[id_col]), *lat, *lon};
    if (spec.dedupe) {
      if (!seen.insert(r.id).second) {
        ++out.duplicates;
        continue;
      }
    }
    out.records.push_back(std::move(r));
  }
  if (parsed == 0) throw EmptyInputError("no parsable rows in " + path);
  return out;
}

/// Directory holding third-party datasets, from INFOSHARE_DATA_DIR.
inline std::optional<std::filesystem::path> dataset_dir() {
  const char* env = std::getenv("INFOSHARE_DATA_DIR");
  if (!env || !*env) return std::nullopt;
  return std::filesystem::path(env);
}

}  // namespace infoshare
