use super::segment::{segment, speakable, tags_in};
use super::{display_name, CompileError, CompilerBackend, CompilerConfig, RawScript};
use crate::tour_model::{ActionSpec, SentenceElement, SentenceType, TourPlan, World};

/// Action set for one sentence.
///
/// * transitions (arrival/departure): speech + visitor tracking
/// * first sentence of an exhibit passage: speech + look + laser
/// * any other narration: speech + visitor tracking
pub fn assign_actions(
    sentence_type: SentenceType,
    exhibit: Option<&str>,
    first_in_passage: bool,
    text: &str,
    cfg: &CompilerConfig,
) -> Vec<ActionSpec> {
    let spoken = speakable(text);
    let audio = ActionSpec::play_audio(spoken.clone(), cfg.audio_duration(&spoken));
    match (sentence_type, exhibit) {
        (SentenceType::Narration, Some(e)) if first_in_passage => vec![
            audio,
            ActionSpec::look_at(e),
            ActionSpec::point_laser(e, cfg.laser_revolutions),
        ],
        _ => vec![audio, ActionSpec::TrackVisitor {}],
    }
}

fn transition(sentence_type: SentenceType, nav_point: &str, text: String, cfg: &CompilerConfig) -> SentenceElement {
    SentenceElement {
        index: 0,
        actions: assign_actions(sentence_type, None, false, &text, cfg),
        text,
        sentence_type,
        nav_point: nav_point.to_string(),
        exhibit: None,
    }
}

/// Arrival sentences for every stop and departure sentences for every
/// stop but the last, interleaved in stop order: `A0, D0, A1, D1, ..., An`.
/// Indices are left at zero for the caller to assign.
pub fn synthesize_transitions(stops: &[String], world: &World, cfg: &CompilerConfig) -> Vec<SentenceElement> {
    let mut out = Vec::with_capacity(stops.len() * 2);
    for (i, stop) in stops.iter().enumerate() {
        let name = world
            .exhibit(stop)
            .map_or_else(|| stop.clone(), |e| display_name(&e.id));
        let arrival = cfg.arrival_template.replace("{stop}", &name);
        out.push(transition(SentenceType::Arrival, stop, arrival, cfg));
        if i + 1 < stops.len() {
            out.push(transition(
                SentenceType::Departure,
                stop,
                cfg.departure_template.clone(),
                cfg,
            ));
        }
    }
    out
}

/// Deterministic reference compiler.
#[derive(Debug, Clone, Default)]
pub struct RuleBackend {
    pub config: CompilerConfig,
}

impl RuleBackend {
    pub fn new(config: CompilerConfig) -> Self {
        Self { config }
    }

    fn narration(&self, stop: &str, text: &str, world: &World) -> Result<Vec<SentenceElement>, CompileError> {
        if text.trim().is_empty() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut current: Option<String> = None;
        for sentence in segment(text)? {
            let tags = tags_in(&sentence);
            if let Some(bad) = tags.iter().find(|t| !world.contains(t)) {
                return Err(CompileError::UnresolvedReference {
                    tag: bad.clone(),
                    stop: stop.to_string(),
                });
            }
            let first = match tags.first() {
                Some(tag) if current.as_deref() != Some(tag.as_str()) => {
                    current = Some(tag.clone());
                    true
                }
                _ => false,
            };
            out.push(SentenceElement {
                index: 0,
                actions: assign_actions(
                    SentenceType::Narration,
                    current.as_deref(),
                    first,
                    &sentence,
                    &self.config,
                ),
                text: sentence,
                sentence_type: SentenceType::Narration,
                nav_point: stop.to_string(),
                exhibit: current.clone(),
            });
        }
        Ok(out)
    }
}

impl CompilerBackend for RuleBackend {
    fn compile(&self, script: &RawScript, world: &World) -> Result<TourPlan, CompileError> {
        let stops = script.stops()?;
        if let Some(bad) = stops.iter().find(|s| !world.contains(&s.nav_point_id)) {
            return Err(CompileError::UnknownStop(bad.nav_point_id.clone()));
        }
        let ids: Vec<String> = stops.iter().map(|s| s.nav_point_id.clone()).collect();
        let mut transitions = synthesize_transitions(&ids, world, &self.config).into_iter();

        let mut elements = Vec::new();
        for (i, stop) in stops.iter().enumerate() {
            elements.extend(transitions.next());
            elements.extend(self.narration(&stop.nav_point_id, &stop.text, world)?);
            if i + 1 < stops.len() {
                elements.extend(transitions.next());
            }
        }
        for (i, el) in elements.iter_mut().enumerate() {
            el.index = i as u32;
        }
        let plan = TourPlan {
            tour_id: script.tour_id.clone(),
            exhibits_ref: None,
            elements,
        };
        crate::tour_model::validate_plan(&plan)?;
        Ok(plan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tour_model::ActionKind;

    fn kinds(actions: &[ActionSpec]) -> Vec<ActionKind> {
        actions.iter().map(ActionSpec::kind).collect()
    }

    #[test]
    fn first_tagged_sentence_points() {
        let a = assign_actions(
            SentenceType::Narration,
            Some("duncan"),
            true,
            "[duncan] was built in 1919.",
            &CompilerConfig::default(),
        );
        assert_eq!(
            kinds(&a),
            vec![ActionKind::PlayAudio, ActionKind::LookAtExhibit, ActionKind::PointLaser]
        );
        assert_eq!(a[2], ActionSpec::point_laser("duncan", 3));
    }

    #[test]
    fn arrival_and_untagged_track() {
        let cfg = CompilerConfig::default();
        for (ty, ex, first) in [
            (SentenceType::Arrival, None, false),
            (SentenceType::Departure, None, false),
            (SentenceType::Narration, Some("duncan"), false),
            (SentenceType::Narration, None, false),
        ] {
            let a = assign_actions(ty, ex, first, "Some words here.", &cfg);
            assert_eq!(kinds(&a), vec![ActionKind::PlayAudio, ActionKind::TrackVisitor]);
        }
    }

    #[test]
    fn transition_counts() {
        let world = World { exhibits: vec![] };
        let cfg = CompilerConfig::default();
        let one = synthesize_transitions(&["a".into()], &world, &cfg);
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].sentence_type, SentenceType::Arrival);
        let three = synthesize_transitions(&["a".into(), "b".into(), "c".into()], &world, &cfg);
        let types: Vec<_> = three.iter().map(|e| e.sentence_type).collect();
        use SentenceType::*;
        assert_eq!(types, vec![Arrival, Departure, Arrival, Departure, Arrival]);
        assert_eq!(three[2].nav_point, "b");
    }

    #[test]
    fn templates_pass_through() {
        let world = World { exhibits: vec![] };
        let cfg = CompilerConfig {
            arrival_template: "Next up: {stop}!".into(),
            departure_template: "Off we go.".into(),
            ..Default::default()
        };
        let t = synthesize_transitions(&["open_day".into(), "b".into()], &world, &cfg);
        assert_eq!(t[0].text, "Next up: open_day!");
        assert_eq!(t[1].text, "Off we go.");
    }
}
