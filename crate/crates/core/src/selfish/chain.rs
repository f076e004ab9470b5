use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Miner {
    Honest,
    Selfish,
}

pub type BlockId = usize;

/// Genesis is always block 0.
pub const GENESIS: BlockId = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub id: BlockId,
    pub parent: Option<BlockId>,
    pub height: u64,
    pub creator: Miner,
    /// Tick (mined-block index) at which the block was found.
    pub created_at: u64,
    /// Tick at which the block became public; `None` while withheld.
    pub published_at: Option<u64>,
}

/// Every block ever mined, public or withheld.
#[derive(Debug, Clone)]
pub struct BlockTree {
    blocks: Vec<Block>,
}

impl Default for BlockTree {
    fn default() -> Self {
        Self::new()
    }
}

impl BlockTree {
    pub fn new() -> Self {
        BlockTree {
            blocks: vec![Block {
                id: GENESIS,
                parent: None,
                height: 0,
                creator: Miner::Honest,
                created_at: 0,
                published_at: Some(0),
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn block(&self, id: BlockId) -> &Block {
        &self.blocks[id]
    }

    pub fn height(&self, id: BlockId) -> u64 {
        self.blocks[id].height
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Adds a withheld block on top of `parent`.
    pub fn mine(&mut self, parent: BlockId, creator: Miner, tick: u64) -> BlockId {
        let id = self.blocks.len();
        let height = self.blocks[parent].height + 1;
        self.blocks.push(Block {
            id,
            parent: Some(parent),
            height,
            creator,
            created_at: tick,
            published_at: None,
        });
        id
    }

    /// Makes a block public; publishing twice keeps the first time.
    pub fn publish(&mut self, id: BlockId, tick: u64) {
        let block = &mut self.blocks[id];
        if block.published_at.is_none() {
            block.published_at = Some(tick);
        }
    }

    /// The block at `height` on the chain ending in `tip`.
    pub fn ancestor_at(&self, tip: BlockId, height: u64) -> BlockId {
        assert!(height <= self.height(tip), "height above tip");
        let mut id = tip;
        while self.blocks[id].height > height {
            id = self.blocks[id].parent.expect("only genesis lacks a parent");
        }
        id
    }

    pub fn is_ancestor(&self, ancestor: BlockId, of: BlockId) -> bool {
        self.height(ancestor) <= self.height(of)
            && self.ancestor_at(of, self.height(ancestor)) == ancestor
    }

    /// Blocks from just above genesis up to `tip`, in height order.
    pub fn chain(&self, tip: BlockId) -> Vec<BlockId> {
        let mut out = Vec::with_capacity(self.height(tip) as usize);
        let mut id = tip;
        while let Some(parent) = self.blocks[id].parent {
            out.push(id);
            id = parent;
        }
        out.reverse();
        out
    }

    /// Blocks per creator on the chain ending in `tip`, genesis excluded:
    /// `(honest, selfish)`.
    pub fn credit(&self, tip: BlockId) -> (u64, u64) {
        self.chain(tip)
            .iter()
            .fold((0, 0), |(h, s), &id| match self.blocks[id].creator {
                Miner::Honest => (h + 1, s),
                Miner::Selfish => (h, s + 1),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heights_and_ancestry() {
        let mut t = BlockTree::new();
        let a = t.mine(GENESIS, Miner::Honest, 1);
        let b = t.mine(a, Miner::Selfish, 2);
        let c = t.mine(a, Miner::Honest, 3);
        assert_eq!(t.height(b), 2);
        assert_eq!(t.ancestor_at(b, 1), a);
        assert!(t.is_ancestor(a, c));
        assert!(!t.is_ancestor(b, c));
        assert_eq!(t.chain(b), vec![a, b]);
        assert_eq!(t.credit(b), (1, 1));
        assert_eq!(t.block(b).published_at, None);
        t.publish(b, 4);
        t.publish(b, 9);
        assert_eq!(t.block(b).published_at, Some(4));
    }
}
