#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maid/modality.hpp"
#include "maid/stage.hpp"
#include "maid/text_tools.hpp"

namespace maid {

using Rng = std::mt19937_64;

/// Edits applied to an output to test re-identification.
namespace perturb {

struct Rect {
    std::uint32_t x = 0, y = 0, w = 0, h = 0;
};

/// Random axis-aligned rectangle covering round(area_fraction * W * H)
/// pixels up to rounding of one side.
Rect random_rect(std::uint32_t width, std::uint32_t height, double area_fraction, Rng& rng);

/// Blacks out a random rectangle of 25% of the area.
ImageBuf mask_region(const ImageBuf& img, Rng& rng, double area_fraction = 0.25);
/// Pastes a random 10% rectangle cut from an unrelated procedural image.
ImageBuf add_content(const ImageBuf& img, Rng& rng, double area_fraction = 0.10);

/// Sentences end at '.', '!' or '?' followed by whitespace or end of text;
/// each returned sentence keeps its terminator and has no surrounding space.
std::vector<std::string> split_sentences(std::string_view text);
std::string join_sentences(const std::vector<std::string>& sentences);

/// Removes round(fraction * n) sentences (at least one when n >= 2).
std::string delete_sentences(std::string_view text, Rng& rng, double fraction = 0.20);
/// Inserts `count` sentences drawn from `pool` at random positions.
std::string insert_sentences(std::string_view text, Rng& rng, const std::vector<std::string>& pool, std::size_t count = 2);
/// Random permutation of the sentences, never the identity when n >= 2.
std::string shuffle_sentences(std::string_view text, Rng& rng);
/// Replaces round(fraction * words) words with random lexicon words.
std::string substitute_words(std::string_view text, Rng& rng, const Lexicon& lexicon = Lexicon::bundled(),
                             double fraction = 0.20);

}  // namespace perturb

struct Perturbation {
    std::string name;
    std::function<Payload(const Payload&, Rng&)> apply;
};

/// Mask, add content, and both.
std::vector<Perturbation> image_perturbations();
/// Delete, insert foreign sentences, shuffle, and word substitution.
std::vector<Perturbation> text_perturbations(std::vector<std::string> foreign_pool);

/// Distinct procedural images (mock text-to-image with per-item prompts).
std::vector<Payload> procedural_images(std::size_t n, std::string_view prefix, std::uint64_t seed,
                                       std::uint32_t side = 64);
/// Plots sampled from the bundled character model, one seed per plot.
std::vector<Payload> generated_plots(std::size_t n, std::uint64_t seed, std::size_t length = 600,
                                     double temperature = kDefaultTemperature);

struct ExperimentPoint {
    std::string group;  // positive | noise | negative
    std::string label;
    double x = 0.0;
    double y = 0.0;
    double score = 0.0;  // cosine against the positive sample
};

struct OperatorTally {
    std::string name;
    std::size_t trials = 0;
    std::size_t hits = 0;
};

struct ExperimentOptions {
    std::uint64_t seed = 7;
    /// Original shown in the scatter, with this many draws per operator.
    std::size_t exemplar = 0;
    std::size_t exemplar_draws = 5;
};

struct ExperimentReport {
    Modality modality = Modality::Image;
    std::size_t originals = 0;
    std::size_t distractors = 0;
    std::size_t trials = 0;
    std::size_t hits = 0;
    double accuracy = 0.0;
    /// No distractors: accuracy is 1.0 by definition.
    bool trivial = false;
    std::vector<OperatorTally> per_operator;

    std::vector<ExperimentPoint> points;
    std::array<double, 2> explained{};
    std::array<double, 2> positive_centroid{};
    std::array<double, 2> noise_centroid{};
    std::array<double, 2> negative_centroid{};
    double noise_to_positive = 0.0;
    double noise_to_negative = 0.0;
    bool centroid_property = false;
};

/// Indexes originals and distractors, then queries every perturbed original
/// for its top-1 match. The scatter is the exemplar original (positive), its
/// perturbed variants (noise) and all distractors (negative), projected onto
/// their top-2 principal components. Throws ModalityMismatch when the inputs
/// mix modalities.
ExperimentReport perturbation_experiment(std::span<const Payload> originals, std::span<const Perturbation> perturbations,
                                         std::span<const Payload> distractors, const ExperimentOptions& options = {});

/// Header "group,label,x,y,score" then one row per point.
std::string to_csv(const ExperimentReport& report);

/// 50 procedural originals, 50 distractors, image operators.
ExperimentReport run_fig5(std::uint64_t seed = 7, std::size_t n = 50, std::size_t m = 50);
/// 50 generated plots, 50 distractor plots, text operators.
ExperimentReport run_fig6(std::uint64_t seed = 7, std::size_t n = 50, std::size_t m = 50);

}  // namespace maid
