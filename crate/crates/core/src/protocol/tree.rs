use super::{check_cuts, Action, Context, Interval, Outcome, Protocol, Speaker, MAX_LEAVES, MAX_MESSAGES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf(Outcome),
    /// The speaker at this depth cuts its admissible interval at `cuts`;
    /// `children[j]` continues after symbol `j`.
    Message { cuts: Vec<f64>, children: Vec<TreeNode> },
}

/// An explicit, finite protocol. Node 1 speaks at even depths, node 2 at odd.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTree {
    domain: [Interval; 2],
    root: TreeNode,
}

impl ProtocolTree {
    /// Checks that every message partitions the speaker's admissible interval.
    pub fn new(domain: [Interval; 2], root: TreeNode) -> Result<Self> {
        validate(&root, domain, 0)?;
        Ok(ProtocolTree { domain, root })
    }

    /// No communication; a single undecided cell.
    pub fn silent() -> Self {
        ProtocolTree {
            domain: [Interval::UNIT, Interval::UNIT],
            root: TreeNode::Leaf(Outcome::Undecided),
        }
    }

    /// One round for `f = 1` iff both inputs exceed 1/2: node 1 says whether
    /// `x1 > 1/2`, and only then node 2 says whether `x2 > 1/2`.
    pub fn quadrant() -> Self {
        let zero = || TreeNode::Leaf(Outcome::Decided(0));
        let root = TreeNode::Message {
            cuts: vec![0.5],
            children: vec![
                zero(),
                TreeNode::Message {
                    cuts: vec![0.5],
                    children: vec![zero(), TreeNode::Leaf(Outcome::Decided(1))],
                },
            ],
        };
        ProtocolTree::new([Interval::UNIT, Interval::UNIT], root).expect("valid tree")
    }

    /// Expands a finite protocol into an explicit tree.
    pub fn unroll<P: Protocol + ?Sized>(protocol: &P) -> Result<Self> {
        let domain = protocol.domain();
        let mut transcript = Vec::new();
        let mut count = 0;
        let root = expand(protocol, domain, &mut transcript, &mut count)?;
        Ok(ProtocolTree { domain, root })
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    /// Longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn go(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf(_) => 0,
                TreeNode::Message { children, .. } => 1 + children.iter().map(go).max().unwrap_or(0),
            }
        }
        go(&self.root)
    }
}

fn validate(node: &TreeNode, intervals: [Interval; 2], depth: usize) -> Result<()> {
    let TreeNode::Message { cuts, children } = node else {
        return Ok(());
    };
    if depth >= MAX_MESSAGES {
        return Err(Error::InvalidProtocol(format!("tree deeper than {MAX_MESSAGES}")));
    }
    let who = Speaker::at(depth).index();
    check_cuts(cuts, intervals[who])?;
    if children.len() != cuts.len() + 1 {
        return Err(Error::InvalidProtocol(format!(
            "{} cuts need {} children, found {}",
            cuts.len(),
            cuts.len() + 1,
            children.len()
        )));
    }
    for (child, piece) in children.iter().zip(intervals[who].pieces(cuts)) {
        let mut next = intervals;
        next[who] = piece;
        validate(child, next, depth + 1)?;
    }
    Ok(())
}

fn expand<P: Protocol + ?Sized>(
    protocol: &P,
    intervals: [Interval; 2],
    transcript: &mut Vec<u32>,
    count: &mut usize,
) -> Result<TreeNode> {
    let ctx = Context {
        transcript,
        intervals,
    };
    match protocol.next_action(&ctx) {
        Action::Stop(outcome) => {
            *count += 1;
            if *count > MAX_LEAVES {
                return Err(Error::InvalidProtocol(format!("more than {MAX_LEAVES} leaves")));
            }
            Ok(TreeNode::Leaf(outcome))
        }
        Action::Send { cuts } => {
            if transcript.len() >= MAX_MESSAGES {
                return Err(Error::InvalidProtocol(format!("no stop after {MAX_MESSAGES} messages")));
            }
            let who = ctx.speaker().index();
            check_cuts(&cuts, intervals[who])?;
            let mut children = Vec::with_capacity(cuts.len() + 1);
            for (j, piece) in intervals[who].pieces(&cuts).enumerate() {
                let mut next = intervals;
                next[who] = piece;
                transcript.push(j as u32);
                children.push(expand(protocol, next, transcript, count)?);
                transcript.pop();
            }
            Ok(TreeNode::Message { cuts, children })
        }
    }
}

impl Protocol for ProtocolTree {
    fn domain(&self) -> [Interval; 2] {
        self.domain
    }

    fn next_action(&self, ctx: &Context<'_>) -> Action {
        let mut node = &self.root;
        for &s in ctx.transcript {
            match node {
                TreeNode::Message { children, .. } => node = &children[s as usize],
                TreeNode::Leaf(_) => unreachable!("transcript runs past a leaf"),
            }
        }
        match node {
            TreeNode::Leaf(outcome) => Action::Stop(*outcome),
            TreeNode::Message { cuts, .. } => Action::Send { cuts: cuts.clone() },
        }
    }
}
