use proptest::prelude::*;
use ragfuzz_core::prompt::{has_placeholder_marker, PromptSet, TemplateId};
use ragfuzz_fixtures::{
    golden_prompt, CHARACTERISTICS, COMPILE_ERROR, EXEMPLAR_PASS, GENERATED_CODE, MUTATION_REQUIREMENTS, PASS_FUNCTION,
};

fn render_golden(set: &PromptSet, id: TemplateId) -> String {
    let rendered = match id {
        TemplateId::Characteristics => set.characteristics_prompt(EXEMPLAR_PASS, PASS_FUNCTION),
        TemplateId::Codegen => set.codegen_prompt(EXEMPLAR_PASS, CHARACTERISTICS),
        TemplateId::Repair => set.repair_prompt(GENERATED_CODE, COMPILE_ERROR),
        TemplateId::Mutation => set.mutation_prompt(GENERATED_CODE, MUTATION_REQUIREMENTS),
    };
    rendered.unwrap().text
}

#[test]
fn rendered_prompts_match_goldens_byte_for_byte() {
    let set = PromptSet::builtin();
    for id in TemplateId::ALL {
        assert_eq!(render_golden(&set, id), golden_prompt(id), "{id}");
    }
}

#[test]
fn goldens_carry_the_bindings_verbatim() {
    assert!(golden_prompt(TemplateId::Characteristics).contains(PASS_FUNCTION));
    assert!(golden_prompt(TemplateId::Codegen).contains(CHARACTERISTICS));
    assert!(golden_prompt(TemplateId::Repair).contains(COMPILE_ERROR));
    assert!(golden_prompt(TemplateId::Mutation).contains(MUTATION_REQUIREMENTS));
    for id in TemplateId::ALL {
        assert!(!has_placeholder_marker(golden_prompt(id)), "{id}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn no_placeholder_survives_random_bindings(a in "[!-z][ -z\n]{0,200}", b in "[!-z][ -z\n]{0,400}", pick in 0usize..4) {
        let set = PromptSet::builtin();
        let id = TemplateId::ALL[pick];
        let rendered = match id {
            TemplateId::Characteristics => set.characteristics_prompt(&a, &b),
            TemplateId::Codegen => set.codegen_prompt(&a, &b),
            TemplateId::Repair => set.repair_prompt(&a, &b),
            TemplateId::Mutation => set.mutation_prompt(&a, &b),
        }
        .unwrap();
        prop_assert!(!has_placeholder_marker(&rendered.text));
        prop_assert!(rendered.text.contains(&a) && rendered.text.contains(&b));
    }
}
