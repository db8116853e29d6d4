#include "bgcam/manifest.hpp"

#include "bgcam/errors.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace bgcam {
namespace {

constexpr std::string_view kMagicLine = "# bgcam manifest v1";

bool has_control_char(const std::string &s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; });
}

template <typename T>
T parse_number(std::string_view text, std::size_t line_no, std::string_view what) {
    T v{};
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size())
        throw ParseError(fmt::format("manifest line {}: bad {} '{}'", line_no, what, text));
    return v;
}

} // namespace

void DatasetManifest::validate() const {
    std::set<std::string> sources, outputs;
    const std::set<std::string> declared(labels.begin(), labels.end());
    if (declared.size() != labels.size()) throw ContractError("manifest label set has duplicates");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto &e = entries[i];
        if (!sources.insert(e.source_path).second)
            throw ContractError(fmt::format("duplicate source path '{}' in manifest", e.source_path));
        if (!e.output_path.empty() && !outputs.insert(e.output_path).second)
            throw ContractError(fmt::format("duplicate output path '{}' in manifest", e.output_path));
        if (!e.label.empty() && !declared.contains(e.label))
            throw ContractError(fmt::format("label '{}' is not in the declared label set", e.label));
        if (i > 0 && e.timestamp_index <= entries[i - 1].timestamp_index)
            throw ContractError("manifest timestamps must increase strictly");
        if (has_control_char(e.source_path) || has_control_char(e.output_path) || has_control_char(e.label))
            throw ContractError(fmt::format("manifest field of entry {} contains a tab or newline", i));
    }
}

void write_manifest(std::ostream &out, const DatasetManifest &m) {
    m.validate();
    const auto &c = m.config_snapshot;
    out << kMagicLine << '\n';
    fmt::print(out, "# threshold={}\n# bits={}\n# modality={}\n# width={}\n# height={}\n# frame_rate={}\n",
               c.threshold, c.bits, to_string(c.modality), c.width, c.height, c.frame_rate);
    fmt::print(out, "# labels={}\n", fmt::join(m.labels, ","));
    for (const auto &e : m.entries)
        fmt::print(out, "{}\t{}\t{}\t{}\n", e.source_path, e.output_path, e.label, e.timestamp_index);
}

DatasetManifest read_manifest(std::istream &in) {
    DatasetManifest m;
    std::string line;
    std::size_t line_no = 0;
    bool saw_magic = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (line == kMagicLine) {
                saw_magic = true;
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const auto key_start = line.find_first_not_of("# ");
            const std::string key = line.substr(key_start, eq - key_start);
            const std::string_view value = std::string_view(line).substr(eq + 1);
            auto &c = m.config_snapshot;
            if (key == "threshold") c.threshold = parse_number<float>(value, line_no, key);
            else if (key == "bits") c.bits = parse_number<int>(value, line_no, key);
            else if (key == "modality") c.modality = parse_modality(value);
            else if (key == "width") c.width = parse_number<int>(value, line_no, key);
            else if (key == "height") c.height = parse_number<int>(value, line_no, key);
            else if (key == "frame_rate") c.frame_rate = parse_number<float>(value, line_no, key);
            else if (key == "labels") {
                m.labels.clear();
                std::istringstream ss{std::string(value)};
                std::string label;
                while (std::getline(ss, label, ',')) m.labels.push_back(label);
            }
            continue;
        }
        std::vector<std::string> fields;
        std::istringstream ss(line);
        std::string field;
        while (std::getline(ss, field, '\t')) fields.push_back(field);
        if (!line.empty() && line.back() == '\t') fields.emplace_back();
        if (fields.size() != 4)
            throw ParseError(fmt::format("manifest line {}: expected 4 tab-separated fields, found {}", line_no,
                                         fields.size()));
        m.entries.push_back(ManifestEntry{fields[0], fields[1], fields[2],
                                          parse_number<std::uint32_t>(fields[3], line_no, "timestamp index")});
    }
    if (!saw_magic) throw ParseError("not a bgcam manifest (missing header line)");
    try {
        m.validate();
    } catch (const ContractError &e) {
        throw ParseError(fmt::format("invalid manifest: {}", e.what()));
    }
    return m;
}

} // namespace bgcam
