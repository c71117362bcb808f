#include "mbfs/harness/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>

#include "mbfs/error.hpp"
#include "mbfs/harness/csv.hpp"

namespace mbfs::harness {
namespace {

struct Step {
    double time;
    std::vector<double> values;
    double label;
    std::size_t line;
};

double parse_number(const std::string& s, std::size_t line, const std::string& column) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (begin != end && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || begin == end) {
        throw Error(ErrorKind::parse_error, "line " + std::to_string(line) + ": column '" + column +
                                                "' is not a number: '" + s + "'");
    }
    return v;
}

}  // namespace

IngestResult ingest_timeseries(std::istream& csv, std::size_t window, std::size_t stride) {
    if (window == 0 || stride == 0) throw Error(ErrorKind::invalid_argument, "window and stride must be positive");
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(csv, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        header = split_csv_line(line);
        break;
    }
    if (header.size() < 4) {
        throw Error(ErrorKind::parse_error, "line " + std::to_string(line_no) +
                                                ": header needs entity, time, at least one feature and label");
    }
    const std::size_t nf = header.size() - 3;

    std::map<std::string, std::vector<Step>> series;
    std::vector<std::string> first_seen;
    while (std::getline(csv, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size()) {
            throw Error(ErrorKind::parse_error, "line " + std::to_string(line_no) + ": expected " +
                                                    std::to_string(header.size()) + " fields, found " +
                                                    std::to_string(f.size()));
        }
        if (f[0].empty()) throw Error(ErrorKind::parse_error, "line " + std::to_string(line_no) + ": empty entity id");
        Step s{parse_number(f[1], line_no, header[1]), {}, parse_number(f.back(), line_no, header.back()), line_no};
        for (std::size_t c = 0; c < nf; ++c) s.values.push_back(parse_number(f[2 + c], line_no, header[2 + c]));
        auto [it, fresh] = series.try_emplace(f[0]);
        if (fresh) first_seen.push_back(f[0]);
        it->second.push_back(std::move(s));
    }

    IngestResult res;
    res.feature_names.assign(header.begin() + 2, header.end() - 1);
    const std::size_t need = (window - 1) * stride + 1;
    std::vector<std::vector<double>> blocks(nf);
    std::vector<double> y;
    for (const auto& id : first_seen) {
        auto& steps = series[id];
        std::stable_sort(steps.begin(), steps.end(), [](const Step& a, const Step& b) { return a.time < b.time; });
        for (std::size_t k = 1; k < steps.size(); ++k) {
            if (steps[k].time == steps[k - 1].time) {
                throw Error(ErrorKind::parse_error, "line " + std::to_string(steps[k].line) + ": entity '" + id +
                                                        "' repeats time " + format_double(steps[k].time));
            }
        }
        if (steps.size() < need) {
            res.dropped_entities.push_back(id);
            continue;
        }
        const std::size_t last = steps.size() - 1;
        for (std::size_t c = 0; c < nf; ++c) {
            for (std::size_t w = 0; w < window; ++w) {
                blocks[c].push_back(steps[last - (window - 1 - w) * stride].values[c]);
            }
        }
        y.push_back(steps[last].label != 0.0 ? 1.0 : 0.0);
        res.entities.push_back(id);
    }
    if (y.empty()) throw Error(ErrorKind::insufficient_samples, "no entity has enough history for the window");
    for (auto& b : blocks) res.data.features.emplace_back(y.size(), window, std::move(b));
    const std::size_t n = y.size();
    res.data.y = knn::SampleBlock(n, 1, std::move(y));
    return res;
}

IngestResult ingest_timeseries_file(const std::string& path, std::size_t window, std::size_t stride) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::invalid_argument, "cannot open '" + path + "'");
    try {
        return ingest_timeseries(in, window, stride);
    } catch (const Error& e) {
        throw Error(e.kind(), path + ": " + e.what());
    }
}

}  // namespace mbfs::harness
