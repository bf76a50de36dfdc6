#pragma once

#include "cpdp/dataset.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

struct ReleaseShape {
    const char* project;
    const char* version;
    std::size_t instances;
    std::size_t defects;
};

// Project, release and size layout of the 34 public PROMISE releases.
inline const std::vector<ReleaseShape>& promise_shape()
{
    static const std::vector<ReleaseShape> shape{
        {"ant", "1.3", 125, 20},        {"ant", "1.4", 178, 40},
        {"ant", "1.5", 293, 32},        {"ant", "1.6", 351, 92},
        {"ant", "1.7", 745, 166},       {"camel", "1.0", 339, 13},
        {"camel", "1.2", 608, 216},     {"camel", "1.4", 872, 145},
        {"camel", "1.6", 965, 188},     {"ivy", "1.1", 111, 63},
        {"ivy", "1.4", 241, 16},        {"ivy", "2.0", 352, 40},
        {"jedit", "3.2", 272, 90},      {"jedit", "4.0", 306, 75},
        {"lucene", "2.0", 195, 91},     {"lucene", "2.2", 247, 144},
        {"lucene", "2.4", 340, 203},    {"poi", "1.5", 237, 141},
        {"poi", "2.0", 314, 37},        {"poi", "2.5", 385, 248},
        {"poi", "3.0", 442, 281},       {"synapse", "1.0", 157, 16},
        {"synapse", "1.1", 222, 60},    {"synapse", "1.2", 256, 86},
        {"velocity", "1.4", 196, 147},  {"velocity", "1.5", 214, 142},
        {"velocity", "1.6", 229, 78},   {"xalan", "2.4", 723, 110},
        {"xalan", "2.5", 803, 387},     {"xalan", "2.6", 885, 411},
        {"xerces", "init", 162, 77},    {"xerces", "1.2", 440, 71},
        {"xerces", "1.3", 453, 69},     {"xerces", "1.4", 588, 437},
    };
    return shape;
}

// Synthetic stand-in with the real sizes and defect counts; metric values
// are drawn per project so releases of one project sit close together.
inline cpdp::Repository promise_like(std::size_t arity = 20, std::uint64_t seed = 1)
{
    cpdp::Repository repo;
    std::mt19937_64 rng(seed);
    std::string last;
    double shift = 0.0;
    for (const auto& s : promise_shape()) {
        if (last != s.project) {
            shift = std::uniform_real_distribution<double>(0.0, 1.5)(rng);
            last = s.project;
        }
        cpdp::SynthesisSpec spec;
        spec.n_instances = s.instances;
        spec.defect_ratio = static_cast<double>(s.defects) / static_cast<double>(s.instances);
        spec.arity = arity;
        spec.clean_means = {1.0 + shift};
        spec.buggy_means = {1.6 + shift};
        spec.spread = 0.6;
        spec.seed = rng();
        spec.id = {s.project, s.version};
        repo.add(cpdp::synthesize(spec));
    }
    return repo;
}

// Small random repository: `projects` projects of 1..3 releases each.
// With `grid` set, metrics are small integers so distance ties are common.
inline cpdp::Repository random_repo(std::mt19937_64& rng, std::size_t projects,
                                    std::size_t max_rows, std::size_t arity, bool grid)
{
    cpdp::Repository repo;
    std::uniform_int_distribution<std::size_t> n_rel(1, 3), n_rows(1, max_rows);
    std::uniform_int_distribution<int> cell(0, 3);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::bernoulli_distribution bug(0.3);
    for (std::size_t p = 0; p < projects; ++p) {
        const std::string name = "p" + std::to_string(p);
        const auto releases = n_rel(rng);
        for (std::size_t v = 0; v < releases; ++v) {
            std::vector<cpdp::Instance> rows;
            const auto n = n_rows(rng);
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<double> x(arity);
                for (auto& e : x)
                    e = grid ? cell(rng) : noise(rng) + static_cast<double>(p) * 0.3;
                rows.emplace_back(std::move(x), bug(rng) ? 1u : 0u);
            }
            repo.add(cpdp::Release({name, std::to_string(v + 1) + ".0"}, std::move(rows), true));
        }
    }
    return repo;
}

} // namespace fixtures
