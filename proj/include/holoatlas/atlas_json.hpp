#ifndef HOLOATLAS_ATLAS_JSON_HPP
#define HOLOATLAS_ATLAS_JSON_HPP

#include <holoatlas/atlas.hpp>

#include <json.hpp>

namespace holoatlas {

inline nlohmann::ordered_json to_json(const RadialConstraint& c) {
    return std::visit(
        [](const auto& k) -> nlohmann::ordered_json {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Disk>)
                return {{"kind", "disk"}, {"r", k.r}};
            else if constexpr (std::is_same_v<K, Annulus>)
                return {{"kind", "annulus"}, {"r0", k.r0}, {"r1", k.r1}};
            else if constexpr (std::is_same_v<K, PuncturedPlane>)
                return {{"kind", "punctured_plane"}};
            else
                return {{"kind", "plane"}};
        },
        c);
}

inline nlohmann::ordered_json to_json(const PolyDomain& d) {
    auto out = nlohmann::ordered_json::array();
    for (const auto& f : d.factors())
        out.push_back(to_json(f));
    return out;
}

/// Charts, domains and transition names; the maps themselves are code.
inline nlohmann::ordered_json to_json(const AtlasDescription& atlas) {
    nlohmann::ordered_json out;
    out["charts"] = nlohmann::ordered_json::array();
    for (const auto& c : atlas.charts())
        out["charts"].push_back({{"id", c.id}, {"dimension", c.dimension()}, {"domain", to_json(c.domain)}});
    out["transitions"] = nlohmann::ordered_json::array();
    for (const auto& t : atlas.transitions())
        out["transitions"].push_back({{"name", t.name},
                                      {"from", t.from},
                                      {"to", t.to},
                                      {"overlap", to_json(t.overlap)},
                                      {"image", to_json(t.image)}});
    return out;
}

} // namespace holoatlas

#endif // HOLOATLAS_ATLAS_JSON_HPP
