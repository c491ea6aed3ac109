#pragma once

#include <string>
#include <vector>

#include "sightline/raster.hpp"

namespace sightline {

/// Civil wall-clock date-time with an explicit UTC offset.
struct CivilDateTime {
    int year = 2000;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
    int hour = 0;
    int minute = 0;
    double second = 0.0;
    double utc_offset_hours = 0.0;

    /// Accepts "YYYY-MM-DDTHH:MM[:SS][Z|+HH:MM|-HH:MM]".
    static CivilDateTime parse(const std::string& text);
    std::string to_string() const;

    /// Throws Validation for impossible dates or years outside 1950-2100.
    void validate() const;

    double julian_day_ut() const;
};

struct SunSample {
    CivilDateTime timestamp;
    double azimuth = 0.0;    // radians from north, clockwise, [0, 2*pi)
    double elevation = 0.0;  // radians above horizon, [-pi/2, pi/2]

    SunDirection direction() const { return {azimuth, elevation}; }
};

/// Solar position (medium-accuracy declination + equation-of-time + hour
/// angle formulation, ~0.2 deg; no atmospheric refraction).
SunSample sun_direction(double lat_deg, double lon_deg, const CivilDateTime& timestamp);

struct ScheduleOptions {
    int start_minutes = 8 * 60;  // civil local time
    int end_minutes = 18 * 60;
    int step_minutes = 30;
};

struct Date {
    int year = 2000;
    int month = 1;
    int day = 1;
    double utc_offset_hours = 0.0;

    /// Accepts "YYYY-MM-DD".
    static Date parse(const std::string& text);
    std::string to_string() const;
};

/// Inclusive sampling of [start, end]; the default window yields 21 samples.
/// Samples with negative elevation are night-time: they stay in the list and
/// callers skip them for shading.
std::vector<SunSample> sun_schedule(double lat_deg, double lon_deg, const Date& date,
                                    const ScheduleOptions& options = {});

}  // namespace sightline
