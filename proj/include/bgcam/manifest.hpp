#pragma once

#include "bgcam/frame.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace bgcam {

struct ManifestEntry {
    std::string source_path; // relative to the input directory
    std::string output_path; // relative to the output directory
    std::string label;       // empty when unlabeled
    std::uint32_t timestamp_index = 0;

    bool operator==(const ManifestEntry &) const = default;
};

/// Index tying every source image to its converted output.
///
/// Text form: '#'-prefixed key=value lines carrying the sensor configuration
/// and the declared label set, then one tab-separated record per line:
///
///     source <TAB> output <TAB> label <TAB> timestamp_index
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    SensorConfig config_snapshot;
    std::vector<std::string> labels; // sorted, unique

    /// Unique paths, labels drawn from `labels`, strictly increasing indices.
    void validate() const;

    bool operator==(const DatasetManifest &) const = default;
};

void write_manifest(std::ostream &out, const DatasetManifest &manifest);
DatasetManifest read_manifest(std::istream &in);

} // namespace bgcam
