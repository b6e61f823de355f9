#include "regstyle/error.hpp"
#include "regstyle/pipeline.hpp"

namespace regstyle::pipeline {

namespace {

std::string join_descriptors(const std::vector<std::string>& d) {
  std::string out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i) out += ", ";
    out += d[i];
  }
  return out;
}

void degrade(PipelineRun& run, std::string why, std::optional<ErrorCode> code = std::nullopt) {
  run.degraded = true;
  run.error = std::move(why);
  run.error_code = code;
  run.output_text.clear();
}

}  // namespace

Pipeline::Pipeline(providers::ChatProvider& chat, std::string model, std::uint64_t seed)
    : chat_(chat), model_(std::move(model)), seed_(seed) {}

PipelineRun Pipeline::run(const TransferCase& c, System s) {
  switch (s) {
    case System::Copy:
    case System::Target:
    case System::Gold:
      return run_naive(c, s);
    case System::Simple:
      return run_simple(c);
    case System::Styll:
      return run_styll(c);
    case System::Rg:
      return run_rg(c);
    case System::RgContrastive:
      return run_rg_contrastive(c);
  }
  throw Error(ErrorCode::Usage, "unknown system");
}

bool Pipeline::step(PipelineRun& run, const PromptTemplate& t, const Bindings& b) {
  Step s;
  s.prompt = render_prompt(t, b);
  providers::ChatRequest req;
  req.model = model_;
  req.messages = {{"user", s.prompt}};
  try {
    s.response = chat_.chat(req);
  } catch (const Error& e) {
    degrade(run, "step " + std::to_string(t.step) + ": " + e.what(), e.code());
    return false;
  }
  if (s.response.find(s.prompt) != std::string::npos) run.suspect = true;
  run.steps.push_back(std::move(s));
  return true;
}

PipelineRun Pipeline::run_simple(const TransferCase& c) {
  PipelineRun run;
  run.case_id = c.id;
  run.system = System::Simple;
  if (!step(run, prompt_template(System::Simple, 1), {{"target_text", c.style_exemplar}, {"input_text", c.input_text}})) {
    return run;
  }
  run.output_text = trim_response(run.steps.back().response);
  if (run.output_text.empty()) degrade(run, "rewrite is empty after trimming");
  return run;
}

PipelineRun Pipeline::three_step(const TransferCase& c, System s) {
  PipelineRun run;
  run.case_id = c.id;
  run.system = s;

  Bindings first;
  std::string carried;  // name of the step-1 output in the step-2 prompt
  switch (s) {
    case System::Styll:
      first = {{"source_text", c.input_text}};
      break;
    case System::Rg:
      first = {{"target_text", c.style_exemplar}};
      carried = "style_analysis";
      break;
    case System::RgContrastive:
      first = {{"source_text", c.input_text}, {"target_text", c.style_exemplar}};
      carried = "style_comparisons";
      break;
    default:
      throw Error(ErrorCode::Usage, "not a three-step system");
  }
  if (!step(run, prompt_template(s, 1), first)) return run;
  const std::string step1 = trim_response(run.steps.back().response);
  if (step1.empty()) {
    degrade(run, "step 1 output is empty after trimming");
    return run;
  }

  // STYLL describes the target directly; the register pipelines describe it
  // through their step-1 analysis.
  const Bindings second = s == System::Styll ? Bindings{{"target_text", c.style_exemplar}} : Bindings{{carried, step1}};
  if (!step(run, prompt_template(s, 2), second)) return run;
  run.descriptors = parse_descriptors(run.steps.back().response);
  if (run.descriptors->empty()) {
    degrade(run, "no style descriptors in step 2 response");
    return run;
  }

  const std::string desc = join_descriptors(*run.descriptors);
  const Bindings third = s == System::Styll ? Bindings{{"neutral_paraphrase", step1}, {"style_descriptors", desc}}
                                            : Bindings{{"source_text", c.input_text}, {"style_descriptors", desc}};
  if (!step(run, prompt_template(s, 3), third)) return run;
  run.output_text = trim_response(run.steps.back().response);
  if (run.output_text.empty()) degrade(run, "rewrite is empty after trimming");
  return run;
}

PipelineRun Pipeline::run_styll(const TransferCase& c) { return three_step(c, System::Styll); }
PipelineRun Pipeline::run_rg(const TransferCase& c) { return three_step(c, System::Rg); }
PipelineRun Pipeline::run_rg_contrastive(const TransferCase& c) { return three_step(c, System::RgContrastive); }

PipelineRun Pipeline::run_naive(const TransferCase& c, System s) const {
  PipelineRun run;
  run.case_id = c.id;
  run.system = s;
  switch (s) {
    case System::Copy:
      run.output_text = c.input_text;
      break;
    case System::Target:
      run.output_text = c.style_exemplar;
      break;
    case System::Gold: {
      if (c.gold_refs.empty()) throw Error(ErrorCode::NoGoldReference, "case " + c.id + " has no gold references");
      // Seeded per case, so the choice does not depend on execution order.
      datasets::SplitMix64 rng(datasets::derive_seed(seed_, "gold-" + c.id));
      run.output_text = c.gold_refs[rng.below(c.gold_refs.size())];
      break;
    }
    default:
      throw Error(ErrorCode::Usage, std::string(to_string(s)) + " is not a naive baseline");
  }
  return run;
}

}  // namespace regstyle::pipeline
