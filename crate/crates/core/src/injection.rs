//! Episode-indexed novelty injection.
//!
//! A [`WrappedEnvironment`] generates pre-novelty worlds until the reset that
//! starts the injection episode, and post-novelty worlds from then on. The
//! swap happens only inside `reset`, so an episode never changes rules midway.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{NoveltyDescriptor, TransformError};
use crate::grid::{
    generate_grid, Action, ConfigError, EnvironmentConfig, GridWorld, Observation, StepError,
    StepResult,
};

#[derive(Debug, Error)]
pub enum InjectionError {
    #[error("injection_episode must be at least 1")]
    ZeroInjectionEpisode,
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(
        "{novelty} changes the observation shape from {pre:?} to {post:?}; novelties must keep it fixed"
    )]
    ShapeChanged {
        novelty: String,
        pre: (usize, usize),
        post: (usize, usize),
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoveltySchedule {
    /// 1-based training episode whose reset switches to post-novelty generation.
    injection_episode: u64,
}

impl NoveltySchedule {
    pub fn new(injection_episode: u64) -> Result<Self, InjectionError> {
        if injection_episode == 0 {
            return Err(InjectionError::ZeroInjectionEpisode);
        }
        Ok(NoveltySchedule { injection_episode })
    }

    pub fn injection_episode(&self) -> u64 {
        self.injection_episode
    }

    /// Whether the `episode`-th reset (1-based) uses the post-novelty config.
    pub fn is_post(&self, episode: u64) -> bool {
        episode >= self.injection_episode
    }
}

#[derive(Debug, Clone)]
pub struct WrappedEnvironment {
    pre_config: EnvironmentConfig,
    post_config: EnvironmentConfig,
    descriptor: NoveltyDescriptor,
    schedule: NoveltySchedule,
    episode_counter: u64,
    inner: GridWorld,
}

/// Computes the post-novelty config eagerly so parameter and layout errors
/// surface before any interaction.
pub fn wrap(
    pre: &EnvironmentConfig,
    descriptor: &NoveltyDescriptor,
    schedule: NoveltySchedule,
    rng: ChaCha8Rng,
) -> Result<WrappedEnvironment, InjectionError> {
    let post = descriptor.apply(pre)?;
    let (a, b) = (pre.observation_shape(), post.observation_shape());
    if a != b || (pre.width, pre.height) != (post.width, post.height) {
        return Err(InjectionError::ShapeChanged {
            novelty: descriptor.name.clone(),
            pre: a,
            post: b,
        });
    }
    let inner = generate_grid(pre, rng)?;
    Ok(WrappedEnvironment {
        pre_config: pre.clone(),
        post_config: post,
        descriptor: descriptor.clone(),
        schedule,
        episode_counter: 0,
        inner,
    })
}

impl WrappedEnvironment {
    /// Starts the next episode, swapping in the post-novelty config once the
    /// schedule says so. Any in-progress episode is discarded.
    pub fn reset(&mut self) -> Observation {
        self.episode_counter += 1;
        let config = if self.schedule.is_post(self.episode_counter) {
            &self.post_config
        } else {
            &self.pre_config
        };
        self.inner
            .reset_with(config)
            .expect("both configs were validated at wrap time")
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult, StepError> {
        self.inner.step(action)
    }

    pub fn is_post_novelty(&self) -> bool {
        self.schedule.is_post(self.episode_counter)
    }

    /// Number of resets so far.
    pub fn episode_counter(&self) -> u64 {
        self.episode_counter
    }

    pub fn schedule(&self) -> NoveltySchedule {
        self.schedule
    }

    pub fn descriptor(&self) -> &NoveltyDescriptor {
        &self.descriptor
    }

    pub fn pre_config(&self) -> &EnvironmentConfig {
        &self.pre_config
    }

    pub fn post_config(&self) -> &EnvironmentConfig {
        &self.post_config
    }

    pub fn world(&self) -> &GridWorld {
        &self.inner
    }
}
