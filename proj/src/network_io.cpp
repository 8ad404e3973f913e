#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gridbarrier/netmodel.hpp"

namespace gridbarrier {

namespace {

constexpr const char* kLinesHeader = "LINES: from,to,r,x";
constexpr const char* kBusesHeader = "BUSES: id,p_e,q_e,p_av,has_inverter";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& s, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": '" + s + "' is not a number");
  }
}

int to_int(const std::string& s, int line_no) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": '" + s + "' is not an integer");
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RadialNetwork parse_network_csv(std::istream& in) {
  enum class Section { None, Lines, Buses } section = Section::None;
  RadialNetwork net;
  std::vector<std::pair<int, BusData>> rows;
  std::string raw;
  int line_no = 0;
  bool saw_lines = false;
  bool saw_buses = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line == kLinesHeader) {
      section = Section::Lines;
      saw_lines = true;
      continue;
    }
    if (line == kBusesHeader) {
      section = Section::Buses;
      saw_buses = true;
      continue;
    }
    const auto f = split(line, ',');
    switch (section) {
      case Section::None:
        throw ParseError("line " + std::to_string(line_no) + ": data before a section header");
      case Section::Lines:
        if (f.size() != 4) throw ParseError("line " + std::to_string(line_no) + ": LINES rows need 4 fields");
        net.lines.push_back({to_int(f[0], line_no), to_int(f[1], line_no), to_double(f[2], line_no),
                             to_double(f[3], line_no)});
        break;
      case Section::Buses: {
        if (f.size() != 5) throw ParseError("line " + std::to_string(line_no) + ": BUSES rows need 5 fields");
        BusData b;
        b.p_e = to_double(f[1], line_no);
        b.q_e = to_double(f[2], line_no);
        b.p_av = to_double(f[3], line_no);
        const int inv = to_int(f[4], line_no);
        if (inv != 0 && inv != 1) {
          throw ParseError("line " + std::to_string(line_no) + ": has_inverter must be 0 or 1");
        }
        b.has_inverter = inv == 1;
        rows.emplace_back(to_int(f[0], line_no), b);
        if (rows.back().first <= 0) {
          throw ParseError("line " + std::to_string(line_no) + ": bus ids start at 1 (slack is not listed)");
        }
        break;
      }
    }
  }
  if (!saw_lines || !saw_buses) throw ParseError("network file needs both LINES and BUSES sections");

  net.n = rows.size();
  net.buses.assign(net.n, BusData{});
  std::vector<bool> seen(net.n, false);
  for (const auto& [id, b] : rows) {
    if (static_cast<std::size_t>(id) > net.n || seen[id - 1]) {
      throw ParseError("bus id " + std::to_string(id) + " is duplicated or out of range 1.." +
                       std::to_string(net.n));
    }
    seen[id - 1] = true;
    net.buses[id - 1] = b;
  }
  validate(net);
  return net;
}

RadialNetwork read_network_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open network file " + path);
  return parse_network_csv(in);
}

std::string format_network_csv(const RadialNetwork& net) {
  std::string out;
  out += kLinesHeader;
  out += '\n';
  for (const Line& ln : net.lines) {
    out += std::to_string(ln.from) + "," + std::to_string(ln.to) + "," + fmt(ln.r) + "," + fmt(ln.x) + "\n";
  }
  out += kBusesHeader;
  out += '\n';
  for (std::size_t k = 0; k < net.n; ++k) {
    const BusData& b = net.buses[k];
    out += std::to_string(k + 1) + "," + fmt(b.p_e) + "," + fmt(b.q_e) + "," + fmt(b.p_av) + "," +
           (b.has_inverter ? "1" : "0") + "\n";
  }
  return out;
}

void write_network_csv(const RadialNetwork& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write network file " + path);
  out << format_network_csv(net);
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace gridbarrier
