use serde::{Deserialize, Serialize};

/// Result of one objective query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    Success(f64),
    /// The evaluation could not be obtained (hidden constraint).
    Failure,
}

impl Outcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            Outcome::Success(v) => Some(*v),
            Outcome::Failure => None,
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, Outcome::Failure)
    }

    /// Failure indicator: +1 for a failure, -1 for a success.
    pub fn label(&self) -> f64 {
        if self.is_failure() {
            1.0
        } else {
            -1.0
        }
    }
}

/// Observations collected so far: inputs paired with their outcome.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    inputs: Vec<Vec<f64>>,
    outcomes: Vec<Outcome>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Dataset of successful observations only.
    pub fn from_values(inputs: Vec<Vec<f64>>, values: Vec<f64>) -> Self {
        assert_eq!(inputs.len(), values.len());
        Self { inputs, outcomes: values.into_iter().map(Outcome::Success).collect() }
    }

    pub fn push(&mut self, x: Vec<f64>, outcome: Outcome) {
        if let Outcome::Success(v) = outcome {
            assert!(v.is_finite(), "successful observations must be finite");
        }
        self.inputs.push(x);
        self.outcomes.push(outcome);
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn success_count(&self) -> usize {
        self.outcomes.iter().filter(|o| !o.is_failure()).count()
    }

    /// Inputs and values of the successful observations.
    pub fn successes(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        self.inputs
            .iter()
            .zip(&self.outcomes)
            .filter_map(|(x, o)| o.value().map(|v| (x.clone(), v)))
            .unzip()
    }

    /// Failure indicators for every observation.
    pub fn labels(&self) -> Vec<f64> {
        self.outcomes.iter().map(Outcome::label).collect()
    }
}
