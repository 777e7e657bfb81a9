#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qkevo/rng.hpp"

namespace qkevo {

/// Gate alphabet for encoding circuits: {X, sqrt(X), Rz, CX}.
enum class GateKind { PauliX, SqrtX, Rz, Cx };

inline const char* gate_kind_name(GateKind k) {
    switch (k) {
        case GateKind::PauliX: return "x";
        case GateKind::SqrtX: return "sx";
        case GateKind::Rz: return "rz";
        case GateKind::Cx: return "cx";
    }
    return "?";
}

inline GateKind gate_kind_from_name(const std::string& name) {
    if (name == "x") return GateKind::PauliX;
    if (name == "sx") return GateKind::SqrtX;
    if (name == "rz") return GateKind::Rz;
    if (name == "cx") return GateKind::Cx;
    throw std::invalid_argument("unknown gate kind '" + name + "'");
}

/// One gate of an encoding circuit. `control` is meaningful only for Cx;
/// `feature` and `scale` only for Rz, whose rotation angle is
/// scale * features[feature].
struct Gene {
    GateKind kind = GateKind::PauliX;
    int target = 0;
    int control = -1;
    int feature = -1;
    double scale = 1.0;

    bool operator==(const Gene& o) const {
        if (kind != o.kind || target != o.target) return false;
        if (kind == GateKind::Cx) return control == o.control;
        if (kind == GateKind::Rz) return feature == o.feature && scale == o.scale;
        return true;
    }
};

/// An ordered gate list over a fixed qubit register; one candidate data
/// encoding circuit of the evolutionary search.
struct Chromosome {
    int n_qubits = 1;
    std::vector<Gene> genes;

    bool operator==(const Chromosome& o) const {
        return n_qubits == o.n_qubits && genes == o.genes;
    }
};

inline int gate_count(const Chromosome& c) { return static_cast<int>(c.genes.size()); }

/// Structural validation; throws std::invalid_argument on any violation.
inline void validate(const Chromosome& c) {
    if (c.n_qubits < 1 || c.n_qubits > 30)
        throw std::invalid_argument("chromosome: n_qubits out of range");
    if (c.genes.empty()) throw std::invalid_argument("chromosome: gene list is empty");
    for (const Gene& g : c.genes) {
        if (g.target < 0 || g.target >= c.n_qubits)
            throw std::invalid_argument("chromosome: gate target out of range");
        if (g.kind == GateKind::Cx) {
            if (g.control < 0 || g.control >= c.n_qubits)
                throw std::invalid_argument("chromosome: CX control out of range");
            if (g.control == g.target)
                throw std::invalid_argument("chromosome: CX control equals target");
        }
        if (g.kind == GateKind::Rz && g.feature < 0)
            throw std::invalid_argument("chromosome: Rz gene without feature index");
    }
}

/// Sample a gene uniformly: kind over the alphabet (CX excluded on a single
/// qubit), target over qubits, control over the remaining qubits, feature
/// over [0, n_features). Draw order is fixed so seeded runs replay exactly.
inline Gene random_gene(int n_qubits, int n_features, Rng& rng) {
    if (n_qubits < 1) throw std::invalid_argument("random_gene: n_qubits must be >= 1");
    if (n_features < 1) throw std::invalid_argument("random_gene: n_features must be >= 1");
    Gene g;
    const int n_kinds = n_qubits == 1 ? 3 : 4;
    g.kind = static_cast<GateKind>(rng.next_int(n_kinds));
    g.target = rng.next_int(n_qubits);
    if (g.kind == GateKind::Cx) {
        int c = rng.next_int(n_qubits - 1);
        if (c >= g.target) ++c;
        g.control = c;
    } else if (g.kind == GateKind::Rz) {
        g.feature = rng.next_int(n_features);
        g.scale = 1.0;
    }
    return g;
}

inline Chromosome random_chromosome(int n_qubits, int n_genes, int n_features, Rng& rng) {
    if (n_genes < 1) throw std::invalid_argument("random_chromosome: n_genes must be >= 1");
    Chromosome c;
    c.n_qubits = n_qubits;
    c.genes.reserve(static_cast<std::size_t>(n_genes));
    for (int i = 0; i < n_genes; ++i) c.genes.push_back(random_gene(n_qubits, n_features, rng));
    return c;
}

inline nlohmann::json to_json(const Chromosome& c) {
    nlohmann::json genes = nlohmann::json::array();
    for (const Gene& g : c.genes) {
        nlohmann::json jg;
        jg["kind"] = gate_kind_name(g.kind);
        jg["target"] = g.target;
        if (g.kind == GateKind::Cx) jg["control"] = g.control;
        if (g.kind == GateKind::Rz) {
            jg["feature"] = g.feature;
            jg["scale"] = g.scale;
        }
        genes.push_back(std::move(jg));
    }
    return nlohmann::json{{"n_qubits", c.n_qubits}, {"genes", std::move(genes)}};
}

inline Chromosome chromosome_from_json(const nlohmann::json& j) {
    Chromosome c;
    c.n_qubits = j.at("n_qubits").get<int>();
    for (const auto& jg : j.at("genes")) {
        Gene g;
        g.kind = gate_kind_from_name(jg.at("kind").get<std::string>());
        g.target = jg.at("target").get<int>();
        if (g.kind == GateKind::Cx) g.control = jg.at("control").get<int>();
        if (g.kind == GateKind::Rz) {
            g.feature = jg.at("feature").get<int>();
            g.scale = jg.at("scale").get<double>();
        }
        c.genes.push_back(g);
    }
    validate(c);
    return c;
}

}  // namespace qkevo
