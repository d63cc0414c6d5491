#include <cmath>

#include <fmt/format.h>

#include "maid/backend.hpp"
#include "maid/error.hpp"
#include "maid/experiment.hpp"
#include "maid/fingerprint.hpp"
#include "maid/mock_media.hpp"
#include "maid/retrieval.hpp"

namespace maid {
namespace {

constexpr std::string_view kPlotStarts[] = {
    "meggie",     "jack",         "aries",           "cynthia",  "the immortal mother",
    "the robot",  "in the city",  "one night",       "the ai",   "after the war",
};

std::array<double, 2> centroid(const std::vector<ExperimentPoint>& pts, std::string_view group) {
    std::array<double, 2> c{};
    std::size_t n = 0;
    for (const auto& p : pts) {
        if (p.group != group) continue;
        c[0] += p.x;
        c[1] += p.y;
        ++n;
    }
    if (n > 0) {
        c[0] /= static_cast<double>(n);
        c[1] /= static_cast<double>(n);
    }
    return c;
}

double distance(const std::array<double, 2>& a, const std::array<double, 2>& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

}  // namespace

std::vector<Perturbation> image_perturbations() {
    return {
        {"mask", [](const Payload& p, Rng& rng) -> Payload { return perturb::mask_region(std::get<ImageBuf>(p), rng); }},
        {"add", [](const Payload& p, Rng& rng) -> Payload { return perturb::add_content(std::get<ImageBuf>(p), rng); }},
        {"mask+add",
         [](const Payload& p, Rng& rng) -> Payload {
             return perturb::add_content(perturb::mask_region(std::get<ImageBuf>(p), rng), rng);
         }},
    };
}

std::vector<Perturbation> text_perturbations(std::vector<std::string> foreign_pool) {
    auto pool = std::make_shared<const std::vector<std::string>>(std::move(foreign_pool));
    return {
        {"delete", [](const Payload& p, Rng& rng) -> Payload { return perturb::delete_sentences(std::get<std::string>(p), rng); }},
        {"insert",
         [pool](const Payload& p, Rng& rng) -> Payload {
             return perturb::insert_sentences(std::get<std::string>(p), rng, *pool);
         }},
        {"shuffle", [](const Payload& p, Rng& rng) -> Payload { return perturb::shuffle_sentences(std::get<std::string>(p), rng); }},
        {"substitute", [](const Payload& p, Rng& rng) -> Payload { return perturb::substitute_words(std::get<std::string>(p), rng); }},
    };
}

std::vector<Payload> procedural_images(std::size_t n, std::string_view prefix, std::uint64_t seed, std::uint32_t side) {
    std::vector<Payload> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(mock_text_to_image(fmt::format("{} {}", prefix, i), seed + i, side, side));
    return out;
}

std::vector<Payload> generated_plots(std::size_t n, std::uint64_t seed, std::size_t length, double temperature) {
    std::vector<Payload> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto start = kPlotStarts[i % std::size(kPlotStarts)];
        out.emplace_back(bundled_lm().generate(start, length, seed * 1000003 + i, temperature));
    }
    return out;
}

ExperimentReport perturbation_experiment(std::span<const Payload> originals, std::span<const Perturbation> perturbations,
                                         std::span<const Payload> distractors, const ExperimentOptions& options) {
    if (originals.empty()) throw Error(ErrorCode::Syntax, "experiment needs at least one original");
    ExperimentReport rep;
    rep.modality = modality_of(originals.front());
    for (const auto* set : {&originals, &distractors})
        for (const auto& p : *set)
            if (modality_of(p) != rep.modality)
                throw Error(ErrorCode::ModalityMismatch,
                            fmt::format("experiment over {} got a {} item", to_string(rep.modality), to_string(modality_of(p))));
    rep.originals = originals.size();
    rep.distractors = distractors.size();

    const std::size_t n = originals.size();
    const std::size_t m = distractors.size();
    std::vector<Embedding> base(n + m);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n + m); ++i)
        base[i] = embed(static_cast<std::size_t>(i) < n ? originals[i] : distractors[i - n]);

    EmbeddingStore store;
    for (std::size_t i = 0; i < n; ++i) store.put(fmt::format("original-{}", i), base[i]);
    for (std::size_t j = 0; j < m; ++j) store.put(fmt::format("distractor-{}", j), base[n + j]);

    // One seed per trial so results do not depend on the thread count.
    const std::size_t ops = perturbations.size();
    Rng seeder(options.seed);
    std::vector<std::uint64_t> seeds(n * ops);
    for (auto& s : seeds) s = seeder();
    std::vector<char> hit(n * ops, 0);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(n * ops); ++t) {
        const std::size_t i = static_cast<std::size_t>(t) / ops;
        Rng rng(seeds[t]);
        const auto query = embed(perturbations[t % ops].apply(originals[i], rng));
        const auto top = store.topk(query, 1, 1);
        hit[t] = !top.empty() && top.front().index == i;
    }

    for (std::size_t k = 0; k < ops; ++k) rep.per_operator.push_back({perturbations[k].name, 0, 0});
    for (std::size_t t = 0; t < n * ops; ++t) {
        auto& tally = rep.per_operator[t % ops];
        ++tally.trials;
        tally.hits += hit[t] ? 1 : 0;
    }
    rep.trials = n * ops;
    for (const auto& tally : rep.per_operator) rep.hits += tally.hits;
    if (m == 0) {
        rep.trivial = true;
        rep.accuracy = 1.0;
    } else {
        rep.accuracy = rep.trials == 0 ? 1.0 : static_cast<double>(rep.hits) / static_cast<double>(rep.trials);
    }

    // Scatter of one original in the style of the published figures.
    const std::size_t ex = std::min(options.exemplar, n - 1);
    const auto& positive = base[ex];
    std::vector<Embedding> rows{positive};
    rep.points.push_back({"positive", fmt::format("original-{}", ex)});
    Rng draw(options.seed ^ 0x9e3779b97f4a7c15ULL);
    for (const auto& op : perturbations) {
        for (std::size_t d = 0; d < options.exemplar_draws; ++d) {
            rows.push_back(embed(op.apply(originals[ex], draw)));
            rep.points.push_back({"noise", fmt::format("{}-{}", op.name, d)});
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        rows.push_back(base[n + j]);
        rep.points.push_back({"negative", fmt::format("distractor-{}", j)});
    }
    for (std::size_t r = 0; r < rows.size(); ++r) rep.points[r].score = cosine(positive, rows[r]);

    const std::size_t d = embedding_dim(rep.modality);
    if (rows.size() >= 3) {
        std::vector<double> flat;
        flat.reserve(rows.size() * d);
        for (const auto& e : rows) flat.insert(flat.end(), e.values.begin(), e.values.end());
        try {
            const auto pca = pca_project(flat, rows.size(), d);
            rep.explained = pca.explained;
            for (std::size_t r = 0; r < rows.size(); ++r) {
                rep.points[r].x = pca.coords[r][0];
                rep.points[r].y = pca.coords[r][1];
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateData) throw;
        }
    }
    rep.positive_centroid = centroid(rep.points, "positive");
    rep.noise_centroid = centroid(rep.points, "noise");
    rep.negative_centroid = centroid(rep.points, "negative");
    rep.noise_to_positive = distance(rep.noise_centroid, rep.positive_centroid);
    rep.noise_to_negative = distance(rep.noise_centroid, rep.negative_centroid);
    rep.centroid_property = m > 0 && ops > 0 && rep.noise_to_positive < rep.noise_to_negative;
    return rep;
}

std::string to_csv(const ExperimentReport& report) {
    std::string out = "group,label,x,y,score\n";
    for (const auto& p : report.points) out += fmt::format("{},{},{:.9g},{:.9g},{:.9g}\n", p.group, p.label, p.x, p.y, p.score);
    return out;
}

ExperimentReport run_fig5(std::uint64_t seed, std::size_t n, std::size_t m) {
    const auto originals = procedural_images(n, "original", seed);
    const auto distractors = procedural_images(m, "distractor", seed + 0x10000);
    const auto ops = image_perturbations();
    return perturbation_experiment(originals, ops, distractors, {.seed = seed});
}

ExperimentReport run_fig6(std::uint64_t seed, std::size_t n, std::size_t m) {
    const auto originals = generated_plots(n, seed);
    const auto distractors = generated_plots(m, seed + 0x10000);
    const auto ops = text_perturbations(perturb::split_sentences(bundled_corpus()));
    return perturbation_experiment(originals, ops, distractors, {.seed = seed});
}

}  // namespace maid
