use std::fmt::Write as _;

use serde::Serialize;

use super::{draw_index, GroupConfig, LearnerOutcome};
use crate::question::QType;
use crate::quizengine::{cohort_rectification, level_breakdown, mean_sd, normalized_score, CohortRate, PerSkill, QuizSpec, ResponseRecord};
use crate::seed::Rng;

/// Mean and population standard deviation over learners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> MeanSd {
        let (mean, sd) = mean_sd(values).unwrap_or((0.0, 0.0));
        MeanSd {
            mean,
            sd,
            n: values.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestSummary {
    /// Share of all correct answers falling at each level, in percent.
    pub level_percent: [f64; 6],
    pub scores: PerSkill<MeanSd>,
    pub overall: MeanSd,
}

impl TestSummary {
    fn of<'a>(tests: impl Iterator<Item = &'a [ResponseRecord]> + Clone) -> TestSummary {
        let mut counts = [0u64; 6];
        for t in tests.clone() {
            for (c, n) in counts.iter_mut().zip(level_breakdown(t)) {
                *c += n;
            }
        }
        let total: u64 = counts.iter().sum();
        let level_percent = counts.map(|c| if total == 0 { 0.0 } else { 100.0 * c as f64 / total as f64 });
        let scores = PerSkill::from_fn(|q| {
            let v: Vec<f64> = tests
                .clone()
                .filter_map(|t| normalized_score(t.iter().filter(|r| r.qtype == q)))
                .collect();
            MeanSd::of(&v)
        });
        let overall: Vec<f64> = tests.filter_map(|t| normalized_score(t.iter())).collect();
        TestSummary {
            level_percent,
            scores,
            overall: MeanSd::of(&overall),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainSummary {
    /// Post-test minus pretest normalized score, per learner.
    pub overall: MeanSd,
    /// Percentile bootstrap 95% interval of the mean overall gain.
    pub ci95: [f64; 2],
    pub per_skill: PerSkill<MeanSd>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport {
    pub name: String,
    pub quiz: QuizSpec,
    pub pretest: TestSummary,
    pub posttest: TestSummary,
    pub gain: GainSummary,
    pub rectification: CohortRate,
    /// Fraction of activities in which each skill was engaged.
    pub engaged_share: PerSkill<f64>,
    /// Mean delivered difficulty minus ability at delivery time.
    pub difficulty_offset: PerSkill<f64>,
    pub ability_growth: PerSkill<f64>,
}

fn score(t: &[ResponseRecord], q: Option<QType>) -> Option<f64> {
    normalized_score(t.iter().filter(|r| q.is_none_or(|q| r.qtype == q)))
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    mean_sd(&v).map_or(0.0, |m| m.0)
}

/// Percentile bootstrap interval (2.5%, 97.5%) of the mean.
pub fn bootstrap_mean_ci(values: &[f64], resamples: usize, rng: &mut Rng) -> [f64; 2] {
    if values.is_empty() || resamples == 0 {
        return [0.0, 0.0];
    }
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[draw_index(rng, n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let at = |p: f64| means[((p * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    [at(0.025), at(0.975)]
}

impl GroupReport {
    pub fn summarize(group: &GroupConfig, outcomes: &[LearnerOutcome], resamples: usize, rng: &mut Rng) -> GroupReport {
        let gains_for = |q: Option<QType>| -> Vec<f64> {
            outcomes
                .iter()
                .filter_map(|o| Some(score(&o.posttest, q)? - score(&o.pretest, q)?))
                .collect()
        };
        let overall = gains_for(None);
        let ci95 = bootstrap_mean_ci(&overall, resamples, rng);
        let activities = outcomes.first().map_or(0, |o| o.state.profile.activity).max(1) as f64;
        GroupReport {
            name: group.name.clone(),
            quiz: group.quiz.clone(),
            pretest: TestSummary::of(outcomes.iter().map(|o| o.pretest.as_slice())),
            posttest: TestSummary::of(outcomes.iter().map(|o| o.posttest.as_slice())),
            gain: GainSummary {
                overall: MeanSd::of(&overall),
                ci95,
                per_skill: PerSkill::from_fn(|q| MeanSd::of(&gains_for(Some(q)))),
            },
            rectification: cohort_rectification(outcomes.iter().map(|o| &o.state.profile)),
            engaged_share: PerSkill::from_fn(|q| mean(outcomes.iter().map(|o| *o.engaged.get(q) as f64 / activities))),
            difficulty_offset: PerSkill::from_fn(|q| mean(outcomes.iter().map(|o| *o.mean_offset.get(q)))),
            ability_growth: PerSkill::from_fn(|q| {
                mean(outcomes.iter().map(|o| o.final_ability.get(q) - o.initial_ability.get(q)))
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub seed: u64,
    pub learners: usize,
    pub activities: u32,
    pub bank_items: usize,
    pub groups: Vec<GroupReport>,
}

fn cell(m: &MeanSd) -> String {
    format!("{:.2} ({:.2})", m.mean, m.sd)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.2}"))
}

impl MetricsReport {
    pub fn group(&self, name: &str) -> Option<&GroupReport> {
        self.groups.iter().find(|g| g.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Aligned text tables.
    pub fn render(&self) -> String {
        let w = self.groups.iter().map(|g| g.name.len()).max().unwrap_or(5).max(5);
        let mut o = String::new();
        let _ = writeln!(
            o,
            "seed {}, {} learners per group, {} activities, {} bank items\n",
            self.seed, self.learners, self.activities, self.bank_items
        );

        let _ = writeln!(o, "Correct answers by level (% of all correct answers)");
        let _ = writeln!(o, "{:<w$}  {:<9}{:>8}{:>8}{:>8}{:>8}{:>8}{:>8}", "group", "test", "L1", "L2", "L3", "L4", "L5", "L6");
        for g in &self.groups {
            for (label, t) in [("pretest", &g.pretest), ("post-test", &g.posttest)] {
                let _ = write!(o, "{:<w$}  {label:<9}", g.name);
                for p in t.level_percent {
                    let _ = write!(o, "{:>8}", format!("{p:.1}%"));
                }
                o.push('\n');
            }
        }

        let _ = writeln!(o, "\nNormalized scores, mean (SD)");
        let _ = writeln!(o, "{:<w$}  {:<9}{:>14}{:>14}{:>14}{:>14}", "group", "test", "vocabulary", "grammar", "reading", "overall");
        for g in &self.groups {
            for (label, t) in [("pretest", &g.pretest), ("post-test", &g.posttest)] {
                let _ = write!(o, "{:<w$}  {label:<9}", g.name);
                for q in QType::ALL {
                    let _ = write!(o, "{:>14}", cell(t.scores.get(q)));
                }
                let _ = writeln!(o, "{:>14}", cell(&t.overall));
            }
        }

        let _ = writeln!(o, "\nGain (post-test minus pretest), mean (SD)");
        let _ = writeln!(o, "{:<w$}  {:>14}{:>18}{:>14}{:>14}{:>14}", "group", "overall", "95% CI", "vocabulary", "grammar", "reading");
        for g in &self.groups {
            let ci = format!("[{:.3}, {:.3}]", g.gain.ci95[0], g.gain.ci95[1]);
            let _ = write!(o, "{:<w$}  {:>14}{ci:>18}", g.name, cell(&g.gain.overall));
            for q in QType::ALL {
                let _ = write!(o, "{:>14}", cell(g.gain.per_skill.get(q)));
            }
            o.push('\n');
        }

        let _ = writeln!(o, "\nRectification rate");
        let _ = writeln!(o, "{:<w$}  {:>8}{:>8}{:>10}", "group", "mean", "SD", "learners");
        for g in &self.groups {
            let r = &g.rectification;
            let _ = writeln!(
                o,
                "{:<w$}  {:>8}{:>8}{:>10}",
                g.name,
                opt(r.mean),
                opt(r.sd),
                format!("{}/{}", r.learners_with_rate, r.learners)
            );
        }

        let _ = writeln!(o, "\nActivity diagnostics per skill (vocabulary / grammar / reading)");
        let _ = writeln!(o, "{:<w$}  {:>20}{:>24}{:>24}", "group", "engaged share", "difficulty - ability", "ability growth");
        for g in &self.groups {
            let tri = |p: &PerSkill<f64>| format!("{:.2}/{:.2}/{:.2}", p.vocabulary, p.grammar, p.reading);
            let _ = writeln!(
                o,
                "{:<w$}  {:>20}{:>24}{:>24}",
                g.name,
                tri(&g.engaged_share),
                tri(&g.difficulty_offset),
                tri(&g.ability_growth)
            );
        }
        let _ = writeln!(o, "\nSD is the population standard deviation (divides by n).");
        o
    }
}
