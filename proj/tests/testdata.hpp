#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

/**
 * tests/testdata.hpp
 *
 * Frozen fixtures shared across the suite: one complete policy rollout in
 * the tagged output format (an organic-chemistry multiple-choice task with
 * four MK sub-blocks, a numbered plan, and one LOOKBACK event), and two
 * supervision samples in the line-delimited dataset schema (5 and 9 gold
 * knowledge units). Byte layout matters here, down to trailing spaces;
 * regenerating or reformatting this file invalidates fidelity tests.
 */

#include <string_view>

namespace testdata {

inline constexpr std::string_view kExampleRollout =
    R"ROLLOUT(<meta>
## Step 1 — Meta Thinking

### Metacognitive Knowledge (MK)

**MK1 - Key Facts about Diethyl Ether and Sodium Metal Reaction:**

* Diethyl ether has the structure CH3CH2-O-CH2CH3 (C2H5OC2H5) - an ether functional group with no O-H bond
* Sodium metal (Na) reacts vigorously with compounds containing acidic/hydrogen atoms attached directly to oxygen (like alcohols: R-OH)
* Alcohols react with Na: 2 R-OH + 2 Na → 2 R-ONa (alkoxide) + H2(g)
* Ethers lack acidic protons - hydrogens are attached to carbon, not oxygen, making them very weakly acidic
* Simple alkyl ethers are chemically inert to sodium metal under normal conditions
* Ethers react with Sodium primarily through H abstraction from trace moisture or impurities if any, not from the ether molecule itself

**MK2 - Comparison with Related Compounds:**

* Ethanol (C2H5OH) + Na → Sodium ethoxide (C2H5ONa) + H2 (this works)
* Diethyl ether (C2H5OC2H5) + Na → No reaction (no acidic H to give up)
* Ethanal is an aldehyde, not produced from this reaction
* The question tests understanding that ethers are much less reactive than alcohols due to lack of O-H bond
* In laboratory practice, diethyl ether is often used as a solvent precisely because it is unreactive with alkali metals like Na, K, Li

**MK3 - Reaction Constraints and Special Cases:**

* Some very reactive conditions at high temperature or with specific metal amide bases could cleave ethers, but not with Na metal alone
* Autoxidation of ethers with -O-O-H impurities can occur with air + Na, but not the ether itself reacting directly
* Sodium reacts with ether impurities (water/ethanol) but if pure diethyl ether + Na, nothing happens
* The classic organic chemistry rule: "Alcohols react with Na, Ethers don't - this is a key distinction"

**MK4 - Exam/Question Pattern Recognition:**

* This is a standard objective question testing functional group reactivity differences
* The correct answer is commonly taught in organic chemistry courses around ether stability
* Options (a), (b), (c) represent reactions that require specific conditions or different reactants
* Option (d) "Nothing happens" reflects the known inertness of ethers toward Na metal

### Metacognitive Regulation (MR)

* **Plan:**

  1. Analyze the functional groups present (ether vs alcohol)
  2. Recall sodium's reactivity profile (reacts with protic compounds, not hydrocarbons/ethers)
  3. Identify that diethyl ether has no acidic hydrogen for Na to deprotonate
  4. Eliminate all options that require different reactants/mechanisms
  5. Conclude "Nothing happens" is correct based on ether inertness
* **If blocked:** Check if special conditions exist (answer confirms standard conditions apply, no special cases mentioned)
* **Noticing:** The answer seems counterintuitive to students expecting a reaction - this is the teaching point of the question

### LOOKBACK:

* **Seeking:** Is there any exception where sodium cleaves diethyl ether?
* **Found:** Sodium can eventually react with ethers only under extreme conditions or via radical mechanisms not relevant here. Standard undergraduate chemistry teaches ethers are inert to Na metal. Lithium metal in certain conditions can cleave ethers (Williamson-type), but Na alone does not. This confirms option (d) is correct.

</meta>

<answer>
The correct answer is **(d) Nothing happens**.

**Explanation:**
Diethyl ether (C2H5OC2H5) is an ether with no O-H (hydroxyl) protons. Sodium metal reacts with compounds containing acidic hydrogens attached to oxygen (such as alcohols) to form alkoxides and hydrogen gas:

2 C2H5OH + 2 Na → 2 C2H5ONa (sodium ethoxide) + H2↑

However, **diethyl ether lacks this acidic hydrogen**. The protons in ether are attached to carbon atoms, not oxygen, making them extremely weakly acidic. Ethers are known for their chemical inertness and are commonly used as solvents that do not react with alkali metals like sodium under normal conditions.

* (a) Ethanol would not form from ether + Na
* (b) Sodium ethoxide would form from ethanol + Na, not ether + Na
* (c) Ethanal is an aldehyde, not produced in this reaction
* (d) Nothing happens - ✓ correct because ethers are inert to sodium metal

**Answer: (d)** 
</answer>)ROLLOUT";

inline constexpr std::string_view kSample11180 =
    R"JSONL({"sample_id":"sample_11180","prompt":[{"role":"user","content":"A one-year-old child presents with short stature, lethargy, and constipation, along with a palpable goiter. Laboratory tests show low T4 and elevated TSH levels. What is the most likely diagnosis for this child's condition?\n\n========= SOLVE STRATEGY =========\nAbove you are given a task. Follow the two steps to solve the task.\n\n## Step 1 — Meta thinking \nIdentify any knowledge that is task-relevant, necessary, or highly important for solving the task.\n\nMetacognitive Knowledge (MK): task-relevant knowledge needed for solving\n(e.g., key facts / definitions / constraints / rules / procedures / exceptions).\n- [mk1] \n- [mk2]\n\nMetacognitive Regulation (MR): \n- [plan] # short executable steps\n\nThen solve using the MK and MR.\nIf you become blocked, uncertain, or realize that an important piece of knowledge was not included in MK, trigger LOOKBACK.\n\nLOOKBACK:\n- [Seeking] # exactly what you need\n- [Found] # the recalled or derived knowledge\nThen continue solving.\n\n## Step 2 — Answer \nCheck: does your answer apply the necessary knowledge and follow the correct plan?\nProvide the final answer.\n\nRules:\n- The meta thinking process and answer must be enclosed within <meta> and <answer> tags, respectively. \n \nOutput format:\n<meta>meta thinking process</meta><answer>final answer</answer>."}],"data_source":"FreedomIntelligence/medical-o1-reasoning-SFT","ability":"medical-qa","reward_model":{"style":"metacognitive","ground_truth":"The most likely diagnosis for this child's condition is congenital hypothyroidism due to dyshormonogenesis. The symptoms of short stature, lethargy, constipation, and a palpable goiter, combined with laboratory findings of low T4 and elevated TSH, suggest that the thyroid gland is present but not functioning properly due to an issue in hormone synthesis. This aligns with dyshormonogenesis, where there is a defect in the process of producing thyroid hormones, leading to primary hypothyroidism and compensatory goiter development.","gold_knowledge_num":5,"gold_knowledge":[{"id":"KU1","text":"In primary hypothyroidism, serum T4 levels are low and TSH levels are elevated due to loss of negative feedback."},{"id":"KU2","text":"A palpable goiter in a hypothyroid child indicates that thyroid tissue is present and enlarged rather than absent or ectopic."},{"id":"KU3","text":"Dyshormonogenesis is a congenital defect in thyroid hormone synthesis that typically presents with a goitrous form of congenital hypothyroidism."},{"id":"KU4","text":"Clinical features of hypothyroidism in infants and young children include lethargy, constipation, and growth failure or short stature."},{"id":"KU5","text":"Congenital hypothyroidism caused by thyroid dysgenesis (agenesis or ectopy) usually presents without a palpable goiter because little or no thyroid tissue is present."}],"possible_meta_regulation":[{"id":"PMR1","text":"Identify the syndrome suggested by the clinical features and labs (hypothyroidism with low T4 and high TSH), then determine whether the thyroid gland is present or absent based on the presence of a goiter, and use this to distinguish among causes of congenital hypothyroidism, selecting dyshormonogenesis when there is a goitrous, primary hypothyroidism due to defective hormone synthesis."}]},"extra_info":{"split":"train","index":11180}})JSONL";

inline constexpr std::string_view kSample8131 =
    R"JSONL({"sample_id":"sample_8131","prompt":[{"role":"user","content":"How can genetic mutations produce new organs or features, and what are the conditions under which these mutations can be beneficial or harmful to an organism? Provide examples of vestigial organs and explain how they relate to the concept of evolution.\n\n========= SOLVE STRATEGY =========\nAbove you are given a task. Follow the two steps to solve the task.\n\n## Step 1 — Meta thinking \nIdentify any knowledge that is task-relevant, necessary, or highly important for solving the task.\n\nMetacognitive Knowledge (MK): task-relevant knowledge needed for solving\n(e.g., key facts / definitions / constraints / rules / procedures / exceptions).\n- [mk1] \n- [mk2]\n\nMetacognitive Regulation (MR): \n- [plan] # short executable steps\n\nThen solve using the MK and MR.\nIf you become blocked, uncertain, or realize that an important piece of knowledge was not included in MK, trigger LOOKBACK.\n\nLOOKBACK:\n- [Seeking] # exactly what you need\n- [Found] # the recalled or derived knowledge\nThen continue solving.\n\n## Step 2 — Answer \nCheck: does your answer apply the necessary knowledge and follow the correct plan?\nProvide the final answer.\n\nRules:\n- The meta thinking process and answer must be enclosed within <meta> and <answer> tags, respectively. \n \nOutput format:\n<meta>meta thinking process</meta><answer>final answer</answer>."}],"data_source":"Meta/natural_reasoning","ability":"science-qa","reward_model":{"style":"metacognitive_rubric","ground_truth":"Genetic mutations can produce new organs or features through various mechanisms, such as saltations, which are mutations with a large effect on morphology. These mutations can be beneficial or harmful depending on the environment, and examples of vestigial organs, such as webbed feet, can illustrate this concept.","gold_knowledge_num":9,"gold_knowledge":[{"id":"KU1","text":"Genetic mutations are changes in an organism’s DNA sequence that can alter development and morphology, potentially producing new or modified organs or features over evolutionary time."},{"id":"KU2","text":"New organs or complex features typically arise not from a single mutation but from the cumulative effect of many mutations that modify existing structures or developmental pathways."},{"id":"KU3","text":"Large-effect mutations (sometimes called saltational changes) can cause major morphological shifts, but most mutations are small in effect and contribute incrementally to phenotypic change."},{"id":"KU4","text":"Whether a mutation is beneficial, neutral, or harmful depends on the specific environment: a change that increases reproductive success in a given environment is beneficial, one that decreases it is harmful, and one with no effect on fitness is neutral."},{"id":"KU5","text":"Natural selection tends to increase the frequency of beneficial mutations and decrease the frequency of harmful ones, whereas neutral mutations can drift in frequency due to genetic drift."},{"id":"KU6","text":"Vestigial organs are structures that have lost most or all of their original function in a species but are homologous to fully functional structures in related species."},{"id":"KU7","text":"Examples of vestigial structures in humans include the appendix, the coccyx (tailbone), wisdom teeth, and the muscles that move the ears; in other animals, examples include the pelvic bones in whales and snakes and reduced wings in flightless birds."},{"id":"KU8","text":"Vestigial organs provide evidence for evolution because they indicate descent from ancestors in which these structures were functional, supporting the idea of modification of pre-existing structures over time."},{"id":"KU9","text":"The same mutation can be beneficial in one environmental or ecological context and harmful in another, illustrating the context-dependence of selection on new traits."}],"possible_meta_regulation":[{"id":"PMR1","text":"Break the task into subtasks: (1) explain mechanistically how mutations can change morphology and give rise to new or modified organs, noting both cumulative small changes and possible large-effect mutations; (2) analyze the conditions under which such mutations count as beneficial, harmful, or neutral using fitness and environment as criteria, and illustrate with at least one contextual example; (3) define vestigial organs precisely, list several concrete examples from humans and other animals, and (4) explicitly connect vestigial structures to evolutionary theory by explaining how they serve as evidence for descent with modification. Ensure each part of the question is answered and that the examples logically support the conceptual explanations."}]},"extra_info":{"split":"train","index":8131}})JSONL";

}  // namespace testdata
