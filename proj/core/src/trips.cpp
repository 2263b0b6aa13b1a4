#include "pan/trips.hpp"

#include <array>
#include <cstdlib>

#include "pan/errors.hpp"

namespace pan {

namespace {

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool parse_fixed_int(const std::string& s, std::size_t pos, std::size_t len, int& out) {
    int value = 0;
    for (std::size_t k = pos; k < pos + len; ++k) {
        if (k >= s.size() || s[k] < '0' || s[k] > '9') return false;
        value = value * 10 + (s[k] - '0');
    }
    out = value;
    return true;
}

}  // namespace

std::optional<std::int64_t> parse_iso8601(const std::string& text) {
    // YYYY-MM-DD[T ]HH:MM:SS with optional trailing 'Z'.
    if (text.size() < 19) return std::nullopt;
    int y, mo, d, h, mi, s;
    if (!parse_fixed_int(text, 0, 4, y) || text[4] != '-' || !parse_fixed_int(text, 5, 2, mo) ||
        text[7] != '-' || !parse_fixed_int(text, 8, 2, d)) {
        return std::nullopt;
    }
    if (text[10] != 'T' && text[10] != ' ') return std::nullopt;
    if (!parse_fixed_int(text, 11, 2, h) || text[13] != ':' || !parse_fixed_int(text, 14, 2, mi) ||
        text[16] != ':' || !parse_fixed_int(text, 17, 2, s)) {
        return std::nullopt;
    }
    if (text.size() > 19 && !(text.size() == 20 && text[19] == 'Z')) return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) return std::nullopt;
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::optional<TripRecord> parse_trip_line(const std::string& line) {
    std::array<std::string, 6> fields;
    std::size_t field = 0, start = 0;
    for (std::size_t k = 0; k <= line.size(); ++k) {
        if (k == line.size() || line[k] == ',') {
            if (field >= fields.size()) return std::nullopt;
            fields[field++] = line.substr(start, k - start);
            start = k + 1;
        }
    }
    if (field != fields.size()) return std::nullopt;

    const auto start_time = parse_iso8601(fields[0]);
    const auto end_time = parse_iso8601(fields[1]);
    if (!start_time || !end_time || *start_time > *end_time) return std::nullopt;

    TripRecord rec;
    rec.start_time = *start_time;
    rec.end_time = *end_time;
    double* coords[4] = {&rec.start_lat, &rec.start_lon, &rec.end_lat, &rec.end_lon};
    for (int k = 0; k < 4; ++k) {
        const std::string& f = fields[k + 2];
        if (f.empty()) return std::nullopt;
        char* end = nullptr;
        const double v = std::strtod(f.c_str(), &end);
        if (end != f.c_str() + f.size()) return std::nullopt;
        *coords[k] = v;
    }
    return rec;
}

std::pair<FrameSeries, IngestReport> ingest_csv(std::istream& in, const GridSpec& spec) {
    spec.validate();
    FrameSeries frames(spec.num_slots, spec.rows, spec.cols, 2);
    IngestReport report;

    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("trip CSV is empty (missing header)");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTripCsvHeader) {
        throw DataError("trip CSV header mismatch; expected \"" + std::string(kTripCsvHeader) +
                        "\"");
    }
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto rec = parse_trip_line(line);
        if (!rec) {
            ++report.malformed_lines;
            continue;
        }
        rasterize_one(*rec, spec, frames, report);
    }
    return {std::move(frames), report};
}

}  // namespace pan
