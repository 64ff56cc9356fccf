#include "memchua/csv_io.hpp"

#include "memchua/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace memchua::io {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        out.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

[[noreturn]] void parse_error(std::size_t line_no, const std::string& what)
{
    throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": " + what);
}

double parse_number(const std::string& field, std::size_t line_no)
{
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (first != last && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || field.empty() || !std::isfinite(value)) {
        parse_error(line_no, "not a finite number: '" + field + "'");
    }
    return value;
}

struct NumericRow {
    std::size_t line_no;
    std::vector<double> values;
};

// Reads header + numeric rows with a fixed column count.
std::vector<NumericRow> read_numeric_csv(std::istream& in, const std::string& header)
{
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            have_header = true;
            break;
        }
    }
    if (!have_header) {
        throw Error(ErrorKind::parse, "line 1: empty file, expected header '" + header + "'");
    }
    if (trim(line) != header) {
        parse_error(line_no, "expected header '" + header + "'");
    }
    const std::size_t columns = split(header).size();

    std::vector<NumericRow> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split(line);
        if (fields.size() != columns) {
            parse_error(line_no, "expected " + std::to_string(columns) + " fields, got " +
                                     std::to_string(fields.size()));
        }
        std::vector<double> row;
        row.reserve(columns);
        for (const auto& f : fields) {
            row.push_back(parse_number(f, line_no));
        }
        rows.push_back({line_no, std::move(row)});
    }
    return rows;
}

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::parse, "cannot open " + path.string());
    }
    return in;
}

}  // namespace

std::string format_number(double x)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc{}) {
        return "nan";
    }
    return std::string(buf, ptr);
}

std::vector<IVSample> read_iv_csv(std::istream& in)
{
    std::vector<IVSample> out;
    for (const auto& [line_no, row] : read_numeric_csv(in, kIVHeader)) {
        out.push_back({row[0], row[1]});
    }
    return out;
}

std::vector<IVSample> read_iv_csv(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return read_iv_csv(in);
}

StateTable read_state_table_csv(std::istream& in)
{
    std::vector<DeviceState> states;
    for (const auto& [line_no, row] : read_numeric_csv(in, kStateTableHeader)) {
        try {
            states.emplace_back(row[0], row[1], row[2], DevicePoly::Coefficients{row[3], row[4], row[5], row[6], row[7]});
        } catch (const Error& e) {
            throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    try {
        return StateTable(std::move(states));
    } catch (const Error& e) {
        throw Error(ErrorKind::parse, std::string("state table: ") + e.what());
    }
}

StateTable read_state_table_csv(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return read_state_table_csv(in);
}

void write_iv_csv(std::ostream& out, std::span<const IVSample> samples)
{
    out << kIVHeader << '\n';
    for (const auto& s : samples) {
        out << format_number(s.v) << ',' << format_number(s.i) << '\n';
    }
}

void write_state_table_csv(std::ostream& out, std::span<const DeviceState> states)
{
    out << kStateTableHeader << '\n';
    for (const auto& s : states) {
        out << format_number(s.r_prog()) << ',' << format_number(s.v_set_mag()) << ',' << format_number(s.v_stop());
        for (double p : s.poly().coeffs()) {
            out << ',' << format_number(p);
        }
        out << '\n';
    }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj)
{
    out << kTrajectoryHeader << '\n';
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const auto& s = traj.states[k];
        out << format_number(traj.times[k]) << ',' << format_number(s.v1) << ',' << format_number(s.v2) << ','
            << format_number(s.i_l) << '\n';
    }
}

void write_events_csv(std::ostream& out, const Trajectory& traj)
{
    out << kEventsHeader << '\n';
    for (const auto& e : traj.events) {
        out << format_number(e.time) << ',' << to_string(e.kind) << ',' << format_number(e.value) << '\n';
    }
}

void write_bifurcation_rows(std::ostream& out, double r_prog, std::span<const double> extrema, TrajectoryLabel label)
{
    const std::string r = format_number(r_prog);
    for (double x : extrema) {
        out << r << ',' << format_number(x) << ',' << to_string(label) << '\n';
    }
}

void write_bifurcation_csv(std::ostream& out, std::span<const SweepPoint> points)
{
    out << kBifurcationHeader << '\n';
    for (const auto& p : points) {
        write_bifurcation_rows(out, p.r_prog, p.extrema, p.verdict.label);
    }
}

}  // namespace memchua::io
