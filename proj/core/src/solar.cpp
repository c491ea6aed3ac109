#include "sightline/solar.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "sightline/errors.hpp"

namespace sightline {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;

int days_in_month(int year, int month) {
    static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2) {
        const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return kDays[month - 1];
}

long long julian_day_number(int year, int month, int day) {
    const long long a = (month - 14) / 12;
    return (1461LL * (year + 4800 + a)) / 4 + (367LL * (month - 2 - 12 * a)) / 12 -
           (3LL * ((year + 4900 + a) / 100)) / 4 + day - 32075;
}

double wrap_degrees(double deg) {
    double d = std::fmod(deg, 360.0);
    if (d < 0.0) d += 360.0;
    return d;
}

struct SolarGeometry {
    double declination_rad;
    double eot_minutes;  // equation of time
};

SolarGeometry solar_geometry(double jd_ut) {
    const double jc = (jd_ut - 2451545.0) / 36525.0;

    const double mean_long = wrap_degrees(280.46646 + jc * (36000.76983 + 0.0003032 * jc));
    const double mean_anom = 357.52911 + jc * (35999.05029 - 0.0001537 * jc);
    const double ecc = 0.016708634 - jc * (0.000042037 + 0.0000001267 * jc);
    const double ma = mean_anom * kDegToRad;
    const double eq_center = std::sin(ma) * (1.914602 - jc * (0.004817 + 0.000014 * jc)) +
                             std::sin(2 * ma) * (0.019993 - 0.000101 * jc) +
                             std::sin(3 * ma) * 0.000289;
    const double true_long = mean_long + eq_center;
    const double omega = (125.04 - 1934.136 * jc) * kDegToRad;
    const double app_long = true_long - 0.00569 - 0.00478 * std::sin(omega);

    const double obliq0 =
        23.0 + (26.0 + (21.448 - jc * (46.815 + jc * (0.00059 - jc * 0.001813))) / 60.0) / 60.0;
    const double obliq = (obliq0 + 0.00256 * std::cos(omega)) * kDegToRad;

    const double decl = std::asin(std::sin(obliq) * std::sin(app_long * kDegToRad));

    const double y = std::tan(obliq / 2.0) * std::tan(obliq / 2.0);
    const double l0 = mean_long * kDegToRad;
    const double eot_rad = y * std::sin(2 * l0) - 2.0 * ecc * std::sin(ma) +
                           4.0 * ecc * y * std::sin(ma) * std::cos(2 * l0) -
                           0.5 * y * y * std::sin(4 * l0) -
                           1.25 * ecc * ecc * std::sin(2 * ma);
    return {decl, 4.0 * eot_rad / kDegToRad};
}

}  // namespace

void CivilDateTime::validate() const {
    if (year < 1950 || year > 2100)
        throw Error(ErrorKind::Validation, "timestamp year must be within 1950-2100");
    if (month < 1 || month > 12) throw Error(ErrorKind::Validation, "month out of range");
    if (day < 1 || day > days_in_month(year, month))
        throw Error(ErrorKind::Validation, "day out of range for month");
    if (hour < 0 || hour > 23 || minute < 0 || minute > 59 || second < 0.0 || second >= 60.0)
        throw Error(ErrorKind::Validation, "time of day out of range");
    if (std::abs(utc_offset_hours) > 14.0)
        throw Error(ErrorKind::Validation, "UTC offset out of range");
}

double CivilDateTime::julian_day_ut() const {
    const double local_hours = hour + minute / 60.0 + second / 3600.0;
    return static_cast<double>(julian_day_number(year, month, day)) - 0.5 +
           (local_hours - utc_offset_hours) / 24.0;
}

CivilDateTime CivilDateTime::parse(const std::string& text) {
    CivilDateTime t;
    int consumed = 0;
    double sec = 0.0;
    if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d%n", &t.year, &t.month, &t.day, &t.hour,
                    &t.minute, &consumed) != 5)
        throw Error(ErrorKind::Validation, "cannot parse timestamp '" + text + "'");
    std::string rest = text.substr(static_cast<std::size_t>(consumed));
    if (!rest.empty() && rest[0] == ':') {
        int n = 0;
        if (std::sscanf(rest.c_str(), ":%lf%n", &sec, &n) != 1)
            throw Error(ErrorKind::Validation, "cannot parse seconds in '" + text + "'");
        t.second = sec;
        rest = rest.substr(static_cast<std::size_t>(n));
    }
    if (rest == "Z" || rest.empty()) {
        t.utc_offset_hours = 0.0;
    } else {
        int oh = 0, om = 0;
        if (std::sscanf(rest.c_str(), "%d:%d", &oh, &om) != 2)
            throw Error(ErrorKind::Validation, "cannot parse UTC offset in '" + text + "'");
        const double sign = oh < 0 || rest[0] == '-' ? -1.0 : 1.0;
        t.utc_offset_hours = sign * (std::abs(oh) + om / 60.0);
    }
    t.validate();
    return t;
}

std::string CivilDateTime::to_string() const {
    char buf[64];
    const double off = utc_offset_hours;
    const int oh = static_cast<int>(std::abs(off));
    const int om = static_cast<int>(std::round((std::abs(off) - oh) * 60.0));
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d%c%02d:%02d", year, month, day,
                  hour, minute, static_cast<int>(second), off < 0 ? '-' : '+', oh, om);
    return buf;
}

Date Date::parse(const std::string& text) {
    Date d;
    if (std::sscanf(text.c_str(), "%d-%d-%d", &d.year, &d.month, &d.day) != 3)
        throw Error(ErrorKind::Validation, "cannot parse date '" + text + "' (want YYYY-MM-DD)");
    CivilDateTime probe{d.year, d.month, d.day};
    probe.validate();
    return d;
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

SunSample sun_direction(double lat_deg, double lon_deg, const CivilDateTime& timestamp) {
    if (std::abs(lat_deg) > 90.0 || std::abs(lon_deg) > 180.0)
        throw Error(ErrorKind::Validation, "latitude/longitude out of range");
    timestamp.validate();

    const SolarGeometry geom = solar_geometry(timestamp.julian_day_ut());

    const double local_minutes =
        timestamp.hour * 60.0 + timestamp.minute + timestamp.second / 60.0;
    double tst = local_minutes + geom.eot_minutes + 4.0 * lon_deg -
                 60.0 * timestamp.utc_offset_hours;
    tst = std::fmod(tst, 1440.0);
    if (tst < 0.0) tst += 1440.0;
    const double hour_angle = (tst / 4.0 - 180.0) * kDegToRad;

    const double lat = lat_deg * kDegToRad;
    const double decl = geom.declination_rad;
    const double sin_el = std::sin(lat) * std::sin(decl) +
                          std::cos(lat) * std::cos(decl) * std::cos(hour_angle);
    const double elevation = std::asin(std::clamp(sin_el, -1.0, 1.0));

    // Azimuth measured from south, westward positive; shift to north-clockwise.
    const double az_sw = std::atan2(std::sin(hour_angle),
                                    std::cos(hour_angle) * std::sin(lat) -
                                        std::tan(decl) * std::cos(lat));
    const double azimuth = wrap_two_pi(az_sw + kPi);

    return {timestamp, azimuth, elevation};
}

std::vector<SunSample> sun_schedule(double lat_deg, double lon_deg, const Date& date,
                                    const ScheduleOptions& options) {
    if (options.start_minutes >= options.end_minutes)
        throw Error(ErrorKind::Validation, "schedule window is empty (start must precede end)");
    if (options.step_minutes <= 0)
        throw Error(ErrorKind::Validation, "schedule step must be positive");
    std::vector<SunSample> samples;
    for (int m = options.start_minutes; m <= options.end_minutes; m += options.step_minutes) {
        CivilDateTime t{date.year, date.month, date.day, m / 60, m % 60, 0.0,
                        date.utc_offset_hours};
        samples.push_back(sun_direction(lat_deg, lon_deg, t));
    }
    return samples;
}

}  // namespace sightline
