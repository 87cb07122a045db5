#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "fdrsky/geometry.hpp"

namespace fdrsky {

struct UtcTime {
  int year = 2000;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
  int hour = 0;
  int minute = 0;
  double second = 0.0;
};

inline bool operator<(const UtcTime& a, const UtcTime& b) {
  if (a.year != b.year) return a.year < b.year;
  if (a.month != b.month) return a.month < b.month;
  if (a.day != b.day) return a.day < b.day;
  if (a.hour != b.hour) return a.hour < b.hour;
  if (a.minute != b.minute) return a.minute < b.minute;
  return a.second < b.second;
}

inline bool operator==(const UtcTime& a, const UtcTime& b) {
  return a.year == b.year && a.month == b.month && a.day == b.day && a.hour == b.hour &&
         a.minute == b.minute && a.second == b.second;
}

inline void validate(const UtcTime& t) {
  if (t.month < 1 || t.month > 12 || t.day < 1 || t.day > 31 || t.hour < 0 || t.hour > 23 ||
      t.minute < 0 || t.minute > 59 || t.second < 0.0 || t.second >= 61.0) {
    throw std::invalid_argument("invalid UTC timestamp");
  }
}

// Accepts "YYYYMMDD_HHMMSS" and "YYYY-MM-DD[ T]HH:MM:SS[Z]".
inline UtcTime parse_timestamp(const std::string& s) {
  auto digits_at = [&](size_t pos, int n) -> int {
    if (pos + n > s.size()) throw std::invalid_argument("timestamp too short: " + s);
    int v = 0;
    for (int i = 0; i < n; ++i) {
      char c = s[pos + i];
      if (!std::isdigit(static_cast<unsigned char>(c)))
        throw std::invalid_argument("bad digit in timestamp: " + s);
      v = v * 10 + (c - '0');
    }
    return v;
  };
  UtcTime t;
  if (s.size() >= 15 && s[8] == '_') {
    t.year = digits_at(0, 4);
    t.month = digits_at(4, 2);
    t.day = digits_at(6, 2);
    t.hour = digits_at(9, 2);
    t.minute = digits_at(11, 2);
    t.second = digits_at(13, 2);
  } else if (s.size() >= 19 && s[4] == '-' && s[7] == '-' && (s[10] == ' ' || s[10] == 'T') &&
             s[13] == ':' && s[16] == ':') {
    t.year = digits_at(0, 4);
    t.month = digits_at(5, 2);
    t.day = digits_at(8, 2);
    t.hour = digits_at(11, 2);
    t.minute = digits_at(14, 2);
    t.second = digits_at(17, 2);
  } else {
    throw std::invalid_argument("unrecognized timestamp format: " + s);
  }
  validate(t);
  return t;
}

struct SunPosition {
  double elevation_deg = 0.0;  // above the horizon
  double azimuth_deg = 0.0;    // clockwise from north
  Vec3 direction;              // unit vector in the world frame
};

inline SunPosition sun_from_angles(double elevation_deg, double azimuth_deg) {
  double e = elevation_deg * kPi / 180.0;
  double a = azimuth_deg * kPi / 180.0;
  SunPosition s;
  s.elevation_deg = elevation_deg;
  s.azimuth_deg = azimuth_deg;
  s.direction = {std::cos(e) * std::sin(a), std::cos(e) * std::cos(a), std::sin(e)};
  return s;
}

// Closed-form solar ephemeris after Blanco-Muriel et al. (the PSA
// algorithm). Arc-minute-class accuracy over recent decades; geometric
// position, no atmospheric refraction.
inline SunPosition solar_position(const UtcTime& utc, double latitude_deg,
                                  double longitude_deg) {
  validate(utc);
  if (std::abs(latitude_deg) > 90.0 || std::abs(longitude_deg) > 180.0) {
    throw std::invalid_argument("latitude/longitude out of range");
  }

  double decimal_hours = utc.hour + (utc.minute + utc.second / 60.0) / 60.0;
  int64_t aux1 = (utc.month - 14) / 12;
  int64_t aux2 = (1461 * (utc.year + 4800 + aux1)) / 4 +
                 (367 * (utc.month - 2 - 12 * aux1)) / 12 -
                 (3 * ((utc.year + 4900 + aux1) / 100)) / 4 + utc.day - 32075;
  double julian_date = static_cast<double>(aux2) - 0.5 + decimal_hours / 24.0;
  double elapsed = julian_date - 2451545.0;

  double omega = 2.1429 - 0.0010394594 * elapsed;
  double mean_longitude = 4.8950630 + 0.017202791698 * elapsed;
  double mean_anomaly = 6.2400600 + 0.0172019699 * elapsed;
  double ecliptic_longitude = mean_longitude + 0.03341607 * std::sin(mean_anomaly) +
                              0.00034894 * std::sin(2.0 * mean_anomaly) - 0.0001134 -
                              0.0000203 * std::sin(omega);
  double ecliptic_obliquity = 0.4090928 - 6.2140e-9 * elapsed + 0.0000396 * std::cos(omega);

  double sin_el = std::sin(ecliptic_longitude);
  double right_ascension = std::atan2(std::cos(ecliptic_obliquity) * sin_el,
                                      std::cos(ecliptic_longitude));
  if (right_ascension < 0.0) right_ascension += 2.0 * kPi;
  double declination = std::asin(std::sin(ecliptic_obliquity) * sin_el);

  double gmst = 6.6974243242 + 0.0657098283 * elapsed + decimal_hours;
  double lmst = (gmst * 15.0 + longitude_deg) * kPi / 180.0;
  double hour_angle = lmst - right_ascension;
  double lat = latitude_deg * kPi / 180.0;

  double zenith = std::acos(std::cos(lat) * std::cos(hour_angle) * std::cos(declination) +
                            std::sin(declination) * std::sin(lat));
  double azimuth = std::atan2(-std::sin(hour_angle),
                              std::tan(declination) * std::cos(lat) -
                                  std::sin(lat) * std::cos(hour_angle));
  if (azimuth < 0.0) azimuth += 2.0 * kPi;

  // parallax correction for a terrestrial observer
  constexpr double earth_radius_km = 6371.01;
  constexpr double astronomical_unit_km = 149597890.0;
  zenith += (earth_radius_km / astronomical_unit_km) * std::sin(zenith);

  return sun_from_angles(90.0 - zenith * 180.0 / kPi, azimuth * 180.0 / kPi);
}

}  // namespace fdrsky
