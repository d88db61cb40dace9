#pragma once

#include "texfuse/descriptors.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace texfuse {

/// A named descriptor instance: `type` selects the algorithm, `params` its settings.
struct DescriptorConfig {
    std::string id;
    std::string type;
    nlohmann::json params = nlohmann::json::object();

    /// Stable 64-bit hash of type + canonical params, hex encoded.
    std::string params_hash() const;
};

/// Descriptor with optional training (codebooks) on a training split.
class Descriptor {
public:
    virtual ~Descriptor() = default;

    virtual bool trainable() const { return false; }
    virtual void fit(std::span<const GrayImage> /*training*/, std::uint64_t /*seed*/) {}
    virtual FeatureVector extract(const GrayImage& img) const = 0;
    /// Expected output dimension (0 when it depends on training).
    virtual std::size_t dim() const = 0;

    /// Codebook persistence for trainable descriptors.
    virtual void save_state(const std::filesystem::path& /*path*/) const {}
    virtual void load_state(const std::filesystem::path& /*path*/) {}
};

/// Throws ConfigError naming `descriptors.<id>.<key>` on unknown types or parameters.
std::unique_ptr<Descriptor> make_descriptor(const DescriptorConfig& config);

/// Known descriptor type names.
std::vector<std::string> descriptor_types();

/// The ten descriptors of the stand-alone accuracy table with their default settings.
std::vector<DescriptorConfig> standard_descriptor_set();

}  // namespace texfuse
